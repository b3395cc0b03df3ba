#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triphase/chain.hpp"
#include "triphase/common.hpp"
#include "triphase/designs.hpp"
#include "triphase/estimator.hpp"
#include "triphase/population.hpp"

namespace triphase {

struct EnumerationLimits {
    std::size_t max_frame = kDefaultEnumerationCap;
    std::size_t max_outcomes = 10'000'000;
};

// One realized (S,R,F) with its joint probability and cached statistics.
struct Outcome {
    NestedSample sample;
    double probability = 0.0;

    double t_hat = 0.0;
    double v_hat = 0.0;
    double term1 = 0.0;
    double term2 = 0.0;
    double term3 = 0.0;

    // Decomposition of t_hat - T:
    //   a_s = sum_S ybreve - T, b_r = sum_R ybreve* - sum_S ybreve,
    //   c_f = sum_F ybreve# - sum_R ybreve*
    double a_s = 0.0;
    double b_r = 0.0;
    double c_f = 0.0;

    // Closed-form conditional variances, cached for outer expectations:
    //   var_b_given_s = sumsum_S Delta_kp|S ybreve*_k ybreve*_p
    //   var_c_given_r = sumsum_R Delta_kp|R ybreve#_k ybreve#_p
    double var_b_given_s = 0.0;
    double var_c_given_r = 0.0;
};

// Full joint support of a three-phase design triple.
struct OutcomeDistribution {
    std::vector<Outcome> outcomes;
    double population_total = 0.0;
    // First-phase closed form Var(A_S) = sumsum_U Delta_akp ybreve_k ybreve_p.
    double var_a_closed = 0.0;
};

struct CheckResult {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_gap = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CheckTolerances {
    double mass = 1e-11;           // total probability vs 1
    double point = 1e-10;          // E[t_hat] vs T
    double variance = 1e-9;        // E[v_hat] vs Var(t_hat), decomposition of Var
    double decomposition = 1e-11;  // per-outcome A+B+C vs t_hat - T
    double identity = 1e-10;       // arbitrary-constant identity
};

// Exact design expectations over an enumerated outcome space.
struct ExpectationReport {
    double e_t_hat = 0.0;
    double population_total = 0.0;
    double var_t_hat = 0.0;
    double e_v_hat = 0.0;
    double var_a = 0.0;
    double e_var_b = 0.0;
    double e_var_c = 0.0;
    double total_mass = 0.0;
    double max_decomposition_gap = 0.0;
    std::vector<CheckResult> checks;
    bool all_pass = false;
};

struct IdentityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_gap = 0.0;
};

struct MonteCarloOptions {
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;  // 0 = hardware concurrency
};

struct MonteCarloReport {
    std::uint64_t reps = 0;
    double population_total = 0.0;
    double mean_t = 0.0;
    double se_mean_t = 0.0;
    double mean_v = 0.0;
    double se_mean_v = 0.0;
    double emp_var_t = 0.0;
    double se_emp_var_t = 0.0;
};

// Enumerates the full joint (S,R,F) support with product probabilities and
// per-outcome statistics. d2 and d3 are applied conditionally to each realized
// parent sample. Throws EnumerationLimitError when the population exceeds
// limits.max_frame or the outcome count exceeds limits.max_outcomes.
OutcomeDistribution enumerate_three_phase(const Population& pop, const PhaseDesign& d1,
                                          const PhaseDesign& d2, const PhaseDesign& d3,
                                          const EnumerationLimits& limits = {});

// Exact expectations and the identity checks of the three-phase estimator:
// E[t_hat] vs T, E[v_hat] vs Var(t_hat), the three-component variance
// decomposition, per-outcome A+B+C consistency, and total probability mass.
ExpectationReport expectation_check(const OutcomeDistribution& dist, const Population& pop,
                                    const CheckTolerances& tol = {});

// Checks E{ E_S[ E( sumsum_F c_kp / pi_kp|R | R ) ] } = sumsum_U pi*_kp c_kp
// for an arbitrary pair-indexed constant c (row-major N x N over population
// order). The left side is computed by enumeration, the right by direct
// summation; pi_kp|S must not depend on the realized S (verified, else throws).
IdentityReport arbitrary_constant_identity(const Population& pop, const PhaseDesign& d1,
                                           const PhaseDesign& d2, const PhaseDesign& d3,
                                           const std::vector<double>& c,
                                           const EnumerationLimits& limits = {});

// Seeded uniform [-1,1] pair constants for identity tests, row-major N x N.
// Distinct (seed, index) combinations give independent draws.
std::vector<double> random_pair_constants(std::size_t n, std::uint64_t seed,
                                          std::uint64_t index = 0);

// Streams independent (S,R,F) replicates and reports running means with Monte
// Carlo standard errors. Replicate r draws from a stream derived from
// (seed, r), so results are bit-identical for any thread count.
MonteCarloReport monte_carlo(const Population& pop, const PhaseDesign& d1, const PhaseDesign& d2,
                             const PhaseDesign& d3, const MonteCarloOptions& options);

}  // namespace triphase
