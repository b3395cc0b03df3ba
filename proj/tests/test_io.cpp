#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "triphase/io.hpp"
#include "triphase/jas_alus.hpp"

using namespace triphase;

TEST_CASE("population csv basics") {
    const auto pop = io::parse_population_csv("unit_id,y\n1,1\n2,2\n3,3\n");
    CHECK(pop.size() == 3);
    CHECK(pop.total() == 6.0);
    CHECK(pop.ids() == IdSet{1, 2, 3});
}

TEST_CASE("population csv keeps ascending id order regardless of file order") {
    const auto pop = io::parse_population_csv("unit_id,y\n3,30\n1,10\n2,20\n");
    CHECK(pop.ids() == IdSet{1, 2, 3});
    CHECK(pop.unit(0).y == 10.0);
}

TEST_CASE("population csv with stratum column") {
    const auto pop = io::parse_population_csv("unit_id,y,stratum\n1,1,A\n2,2,A\n3,3,B\n");
    CHECK(pop.has_strata());
    const auto strata = pop.strata();
    CHECK(strata.at(1) == "A");
    CHECK(strata.at(3) == "B");
}

TEST_CASE("population csv errors carry line numbers") {
    SUBCASE("duplicate id") {
        try {
            io::parse_population_csv("unit_id,y\n1,1\n1,2\n");
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
            CHECK(std::string(e.what()).find("duplicate unit_id 1") != std::string::npos);
        }
    }
    SUBCASE("non-numeric y") {
        try {
            io::parse_population_csv("unit_id,y\n1,abc\n");
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("bad header") {
        CHECK_THROWS_AS(io::parse_population_csv("id,y\n1,1\n"), DataError);
        CHECK_THROWS_AS(io::parse_population_csv("unit_id\n1\n"), DataError);
    }
    SUBCASE("field count mismatch") {
        CHECK_THROWS_AS(io::parse_population_csv("unit_id,y\n1,1,extra\n"), DataError);
    }
    SUBCASE("empty file") {
        CHECK_THROWS_AS(io::parse_population_csv(""), DataError);
    }
}

namespace {

const char* kSubstrata =
    "stratum,substratum,e,a,n,n_prime\n"
    "S1,A,2,3,3,2\n"
    "S1,B,1.5,1,1,1\n";
const char* kSegments =
    "stratum,substratum,segment,r,accurate_flag\n"
    "S1,A,1,1.5,0\n"
    "S1,A,2,1.25,0\n"
    "S1,A,3,1,1\n"
    "S1,B,4,2,0\n";
const char* kTracts =
    "stratum,substratum,segment,tract,t_ratio\n"
    "S1,A,1,1,0.5\n"
    "S1,A,1,2,0.25\n"
    "S1,A,2,1,0.8\n"
    "S1,A,3,1,0.6\n"
    "S1,B,4,1,0.9\n";

}  // namespace

TEST_CASE("jas-alus csv loads and cross-validates") {
    const JasAlusFrame frame = io::parse_jas_alus_csv(kSubstrata, kSegments, kTracts);
    REQUIRE(frame.substrata().size() == 2);
    const Substratum& a = frame.substrata()[0];
    CHECK(a.e == 2.0);
    CHECK(a.n == 3);
    CHECK(a.n_prime == 2);
    CHECK(a.segments[0].tract_total() == doctest::Approx(0.75));
    // a segment with no tracts contributes an empty (zero) total
    const auto no_tracts = io::parse_jas_alus_csv(
        "stratum,substratum,e,a,n,n_prime\nS1,A,1,1,1,1\n",
        "stratum,substratum,segment,r,accurate_flag\nS1,A,1,1,0\n",
        "stratum,substratum,segment,tract,t_ratio\n");
    CHECK(no_tracts.substrata()[0].segments[0].tract_total() == 0.0);
    CHECK(t1_estimate(no_tracts) == 0.0);
}

TEST_CASE("jas-alus csv referential and range errors name the row") {
    SUBCASE("tract ratio out of range") {
        try {
            io::parse_jas_alus_csv(kSubstrata, kSegments,
                                   "stratum,substratum,segment,tract,t_ratio\nS1,A,1,1,1.2\n");
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("tracts line 2") != std::string::npos);
        }
    }
    SUBCASE("tract references a missing segment") {
        try {
            io::parse_jas_alus_csv(kSubstrata, kSegments,
                                   "stratum,substratum,segment,tract,t_ratio\nS1,A,9,1,0.5\n");
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("tracts line 2") != std::string::npos);
            CHECK(std::string(e.what()).find("unknown segment") != std::string::npos);
        }
    }
    SUBCASE("segment references a missing substratum") {
        CHECK_THROWS_AS(
            io::parse_jas_alus_csv(kSubstrata,
                                   "stratum,substratum,segment,r,accurate_flag\nS9,Z,1,1,0\n",
                                   kTracts),
            DataError);
    }
    SUBCASE("declared counts must match") {
        CHECK_THROWS_AS(io::parse_jas_alus_csv(
                            "stratum,substratum,e,a,n,n_prime\nS1,A,2,3,5,2\n", kSegments, kTracts),
                        DataError);
    }
    SUBCASE("r below one") {
        CHECK_THROWS_AS(
            io::parse_jas_alus_csv("stratum,substratum,e,a,n,n_prime\nS1,A,1,1,1,1\n",
                                   "stratum,substratum,segment,r,accurate_flag\nS1,A,1,0.5,0\n",
                                   "stratum,substratum,segment,tract,t_ratio\n"),
            DataError);
    }
    SUBCASE("bad accurate flag") {
        CHECK_THROWS_AS(
            io::parse_jas_alus_csv("stratum,substratum,e,a,n,n_prime\nS1,A,1,1,1,1\n",
                                   "stratum,substratum,segment,r,accurate_flag\nS1,A,1,1,yes\n",
                                   "stratum,substratum,segment,tract,t_ratio\n"),
            DataError);
    }
}

TEST_CASE("json writer formatting") {
    io::Json j = io::Json::object();
    j.set("a", io::Json::number(0.5));
    j.set("b", io::Json::number(1.0 / 3.0));
    j.set("c", io::Json::integer(15300));
    j.set("d", io::Json::boolean(true));
    j.set("e", io::Json::string("line\n\"quoted\""));
    io::Json arr = io::Json::array();
    arr.push(io::Json::number(-0.125));
    j.set("f", std::move(arr));
    const std::string text = j.dump();
    CHECK(text.find("\"a\": 0.5") != std::string::npos);
    // 17 significant digits for non-terminating binary fractions
    CHECK(text.find("0.33333333333333331") != std::string::npos);
    CHECK(text.find("\"c\": 15300") != std::string::npos);
    CHECK(text.find("\\n") != std::string::npos);
    CHECK(text.find("\\\"quoted\\\"") != std::string::npos);
    // identical content serializes to identical bytes
    io::Json again = io::Json::object();
    again.set("a", io::Json::number(0.5));
    again.set("b", io::Json::number(1.0 / 3.0));
    again.set("c", io::Json::integer(15300));
    again.set("d", io::Json::boolean(true));
    again.set("e", io::Json::string("line\n\"quoted\""));
    io::Json arr2 = io::Json::array();
    arr2.push(io::Json::number(-0.125));
    again.set("f", std::move(arr2));
    CHECK(again.dump() == text);
}

TEST_CASE("17-digit serialization round-trips doubles exactly") {
    const double values[] = {1.0 / 3.0, 2.0 / 7.0, 1e-300, 12345.6789, -0.1};
    for (double v : values) {
        io::Json j = io::Json::object();
        j.set("x", io::Json::number(v));
        const std::string text = j.dump();
        const auto pos = text.find(": ");
        const double parsed = std::stod(text.substr(pos + 2));
        CHECK(parsed == v);
    }
}

TEST_CASE("content hash is stable and content-sensitive") {
    CHECK(io::content_hash("abc") == io::content_hash("abc"));
    CHECK(io::content_hash("abc") != io::content_hash("abd"));
    CHECK(io::content_hash("").rfind("fnv1a64:", 0) == 0);
}
