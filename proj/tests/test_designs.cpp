#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "triphase/designs.hpp"

using namespace triphase;

namespace {

std::map<UnitId, std::string> two_strata_labels() {
    // units 1..3 in A, 4..6 in B
    std::map<UnitId, std::string> m;
    for (UnitId id = 1; id <= 3; ++id) m[id] = "A";
    for (UnitId id = 4; id <= 6; ++id) m[id] = "B";
    return m;
}

}  // namespace

TEST_CASE("srswor inclusion probabilities on four units") {
    const IdSet frame{1, 2, 3, 4};
    const auto probs = inclusion_probabilities(PhaseDesign::srswor(2), frame);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(probs.first(i) == doctest::Approx(0.5).epsilon(1e-15));
        for (std::size_t j = 0; j < 4; ++j) {
            if (i == j) continue;
            CHECK(probs.joint(i, j) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
            CHECK(probs.delta(i, j) == doctest::Approx(-1.0 / 12.0).epsilon(1e-15));
        }
        CHECK(probs.joint(i, i) == probs.first(i));
    }
}

TEST_CASE("census probabilities are all ones with zero delta") {
    const IdSet frame{7, 9, 11};
    const auto probs = inclusion_probabilities(PhaseDesign::census(), frame);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(probs.first(i) == 1.0);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(probs.joint(i, j) == 1.0);
            CHECK(probs.delta(i, j) == 0.0);
        }
    }
}

TEST_CASE("bernoulli probabilities: product pairs, zero off-diagonal delta") {
    const IdSet frame{1, 2, 3};
    const auto probs = inclusion_probabilities(PhaseDesign::bernoulli(0.5), frame);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(probs.first(i) == 0.5);
        CHECK(probs.delta(i, i) == 0.25);
        for (std::size_t j = 0; j < 3; ++j) {
            if (i == j) continue;
            CHECK(probs.joint(i, j) == 0.25);
            CHECK(probs.delta(i, j) == 0.0);  // exact, by construction
        }
    }
}

TEST_CASE("stratified srswor: independent strata") {
    const IdSet frame{1, 2, 3, 4, 5, 6};
    const auto design = PhaseDesign::stratified_srswor({{"A", 2}, {"B", 1}}, two_strata_labels());
    const auto probs = inclusion_probabilities(design, frame);
    CHECK(probs.first_of(1) == doctest::Approx(2.0 / 3.0));
    CHECK(probs.first_of(5) == doctest::Approx(1.0 / 3.0));
    // same stratum A: 2*1/(3*2) = 1/3
    CHECK(probs.joint_of(1, 2) == doctest::Approx(1.0 / 3.0));
    // same stratum B with n=1: cannot co-occur
    CHECK(probs.joint_of(4, 5) == 0.0);
    // cross-stratum: product
    CHECK(probs.delta_of(1, 4) == 0.0);
}

TEST_CASE("design validation errors") {
    const IdSet frame{1, 2, 3};
    CHECK_THROWS_AS(inclusion_probabilities(PhaseDesign::srswor(4), frame), ValidationError);
    CHECK_THROWS_AS(PhaseDesign::srswor(0), ValidationError);
    CHECK_THROWS_AS(PhaseDesign::bernoulli(0.0), ValidationError);
    CHECK_THROWS_AS(PhaseDesign::bernoulli(1.5), ValidationError);
    CHECK_THROWS_AS(inclusion_probabilities(PhaseDesign::census(), IdSet{}), ValidationError);
    // stratified: missing label, missing stratum size, oversize request
    const auto labels = two_strata_labels();
    CHECK_THROWS_AS(inclusion_probabilities(
                        PhaseDesign::stratified_srswor({{"A", 1}}, labels), IdSet{1, 4}),
                    ValidationError);
    CHECK_THROWS_AS(inclusion_probabilities(
                        PhaseDesign::stratified_srswor({{"A", 2}, {"B", 1}}, labels), IdSet{1, 4}),
                    ValidationError);
}

TEST_CASE("table design validation") {
    // asymmetric duplicates rejected
    CHECK_THROWS_AS(PhaseDesign::table({{1, 0.5}, {2, 0.5}}, {{1, 2, 0.2}, {2, 1, 0.3}}),
                    ValidationError);
    // zero pairwise probability rejected up front
    CHECK_THROWS_AS(PhaseDesign::table({{1, 0.5}, {2, 0.5}}, {{1, 2, 0.0}}), ValidationError);
    // joint above min(pi_k, pi_p)
    CHECK_THROWS_AS(PhaseDesign::table({{1, 0.5}, {2, 0.4}}, {{1, 2, 0.45}}), ValidationError);
    // missing joint entry surfaces when applied to a frame
    const auto design = PhaseDesign::table({{1, 0.5}, {2, 0.5}, {3, 0.5}}, {{1, 2, 0.25}});
    CHECK_THROWS_AS(inclusion_probabilities(design, IdSet{1, 2, 3}), ValidationError);
    // valid table returned verbatim
    const auto ok = PhaseDesign::table({{1, 0.5}, {2, 0.4}}, {{1, 2, 0.3}});
    const auto probs = inclusion_probabilities(ok, IdSet{1, 2});
    CHECK(probs.first_of(1) == 0.5);
    CHECK(probs.joint_of(1, 2) == 0.3);
    CHECK(probs.joint_of(2, 1) == 0.3);
}

TEST_CASE("enumerate_support small cases") {
    SUBCASE("srswor(1) of two units") {
        const auto dist = enumerate_support(PhaseDesign::srswor(1), IdSet{1, 2});
        REQUIRE(dist.outcomes.size() == 2);
        CHECK(dist.outcomes[0].probability == doctest::Approx(0.5));
        CHECK(dist.outcomes[1].probability == doctest::Approx(0.5));
    }
    SUBCASE("bernoulli(0.5) of two units includes the empty set") {
        const auto dist = enumerate_support(PhaseDesign::bernoulli(0.5), IdSet{1, 2});
        REQUIRE(dist.outcomes.size() == 4);
        bool saw_empty = false;
        for (const auto& o : dist.outcomes) {
            CHECK(o.probability == doctest::Approx(0.25));
            if (o.sample.empty()) saw_empty = true;
        }
        CHECK(saw_empty);
    }
    SUBCASE("srswor(2) of four units: six outcomes, exact marginals") {
        const auto dist = enumerate_support(PhaseDesign::srswor(2), IdSet{1, 2, 3, 4});
        REQUIRE(dist.outcomes.size() == 6);
        CHECK(dist.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
        for (UnitId k = 1; k <= 4; ++k) {
            CHECK(dist.marginal(k) == doctest::Approx(0.5).epsilon(1e-12));
        }
    }
    SUBCASE("census single outcome") {
        const auto dist = enumerate_support(PhaseDesign::census(), IdSet{3, 5});
        REQUIRE(dist.outcomes.size() == 1);
        CHECK(dist.outcomes[0].probability == 1.0);
        CHECK(dist.outcomes[0].sample == IdSet{3, 5});
    }
}

TEST_CASE("enumerate_support errors") {
    IdSet big;
    for (UnitId id = 1; id <= 13; ++id) big.push_back(id);
    CHECK_THROWS_AS(enumerate_support(PhaseDesign::bernoulli(0.5), big), EnumerationLimitError);
    CHECK_THROWS_AS(enumerate_support(PhaseDesign::table({{1, 0.5}}, {}), IdSet{1}),
                    ValidationError);
    // outcome-count guard fires even when the frame cap admits the frame
    const IdSet ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK_THROWS_AS(enumerate_support(PhaseDesign::bernoulli(0.5), ten, 12, 1000),
                    EnumerationLimitError);
    CHECK_NOTHROW(enumerate_support(PhaseDesign::bernoulli(0.5), ten, 12, 1024));
}

TEST_CASE("support marginals reproduce inclusion probabilities") {
    const IdSet frame{1, 2, 3, 4, 5, 6};
    const std::vector<PhaseDesign> designs = {
        PhaseDesign::srswor(3),
        PhaseDesign::bernoulli(0.4, {{2, 0.9}}),
        PhaseDesign::census(),
        PhaseDesign::stratified_srswor({{"A", 2}, {"B", 2}}, two_strata_labels()),
    };
    for (const auto& design : designs) {
        CAPTURE(design.describe());
        const auto probs = inclusion_probabilities(design, frame);
        const auto dist = enumerate_support(design, frame);
        CHECK(std::abs(dist.total_mass() - 1.0) < 1e-12);
        CHECK(std::abs(dist.expected_size() - probs.expected_size()) < 1e-12);
        for (std::size_t i = 0; i < frame.size(); ++i) {
            CHECK(std::abs(dist.marginal(frame[i]) - probs.first(i)) < 1e-12);
            for (std::size_t j = i + 1; j < frame.size(); ++j) {
                CHECK(std::abs(dist.marginal_pair(frame[i], frame[j]) - probs.joint(i, j)) <
                      1e-12);
            }
        }
    }
}

TEST_CASE("draw basics") {
    RandomStream stream(7);
    SUBCASE("census returns the frame") {
        CHECK(draw(PhaseDesign::census(), IdSet{1, 2, 3}, stream) == IdSet{1, 2, 3});
    }
    SUBCASE("bernoulli(1) returns the frame") {
        CHECK(draw(PhaseDesign::bernoulli(1.0), IdSet{1, 2, 3}, stream) == IdSet{1, 2, 3});
    }
    SUBCASE("srswor size and membership") {
        for (int i = 0; i < 50; ++i) {
            const IdSet s = draw(PhaseDesign::srswor(2), IdSet{1, 2, 3, 4}, stream);
            REQUIRE(s.size() == 2);
            CHECK(s[0] < s[1]);
            for (UnitId id : s) CHECK((id >= 1 && id <= 4));
        }
    }
    SUBCASE("stratified draw respects per-stratum sizes") {
        const auto design = PhaseDesign::stratified_srswor({{"A", 1}, {"B", 2}},
                                                           two_strata_labels());
        for (int i = 0; i < 50; ++i) {
            const IdSet s = draw(design, IdSet{1, 2, 3, 4, 5, 6}, stream);
            REQUIRE(s.size() == 3);
            int in_a = 0;
            for (UnitId id : s) in_a += id <= 3 ? 1 : 0;
            CHECK(in_a == 1);
        }
    }
    SUBCASE("table designs cannot be drawn from") {
        const auto t = PhaseDesign::table({{1, 0.5}}, {});
        CHECK_THROWS_AS(draw(t, IdSet{1}, stream), ValidationError);
    }
}

TEST_CASE("draw with a fixed seed is reproducible") {
    RandomStream a(42), b(42);
    for (int i = 0; i < 20; ++i) {
        CHECK(draw(PhaseDesign::srswor(3), IdSet{1, 2, 3, 4, 5, 6, 7}, a) ==
              draw(PhaseDesign::srswor(3), IdSet{1, 2, 3, 4, 5, 6, 7}, b));
        CHECK(draw(PhaseDesign::bernoulli(0.3), IdSet{1, 2, 3, 4}, a) ==
              draw(PhaseDesign::bernoulli(0.3), IdSet{1, 2, 3, 4}, b));
    }
}

TEST_CASE("realization validation") {
    const IdSet frame{1, 2, 3, 4, 5, 6};
    CHECK_NOTHROW(validate_realization(PhaseDesign::srswor(2), frame, {2, 5}));
    CHECK_THROWS_AS(validate_realization(PhaseDesign::srswor(2), frame, {2}), ValidationError);
    CHECK_THROWS_AS(validate_realization(PhaseDesign::srswor(2), frame, {2, 9}), ValidationError);
    CHECK_NOTHROW(validate_realization(PhaseDesign::census(), frame, frame));
    CHECK_THROWS_AS(validate_realization(PhaseDesign::census(), frame, {1, 2}), ValidationError);
    CHECK_NOTHROW(validate_realization(PhaseDesign::bernoulli(0.5), frame, {}));
    const auto strat = PhaseDesign::stratified_srswor({{"A", 2}, {"B", 1}}, two_strata_labels());
    CHECK_NOTHROW(validate_realization(strat, frame, {1, 3, 5}));
    CHECK_THROWS_AS(validate_realization(strat, frame, {1, 2, 3}), ValidationError);
}

TEST_CASE("srswor empirical inclusion rates match the computed probabilities") {
    const IdSet frame{1, 2, 3, 4};
    const auto probs = inclusion_probabilities(PhaseDesign::srswor(2), frame);
    RandomStream stream(20240615);
    const int reps = 100000;
    std::map<UnitId, int> hits;
    for (int i = 0; i < reps; ++i) {
        for (UnitId id : draw(PhaseDesign::srswor(2), frame, stream)) ++hits[id];
    }
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const double rate = static_cast<double>(hits[frame[i]]) / reps;
        CHECK(std::abs(rate - probs.first(i)) < 0.005);
    }
}
