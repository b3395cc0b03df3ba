#pragma once

#include <string>
#include <vector>

#include "triphase/chain.hpp"
#include "triphase/common.hpp"

namespace triphase {

// Point estimate, variance estimate and its three summands. `variance` is
// always term1 + term2 + term3; a negative total is reported as-is with a
// warning, never truncated.
struct EstimateReport {
    double point = 0.0;
    double variance = 0.0;
    double term1 = 0.0;
    double term2 = 0.0;
    double term3 = 0.0;
    std::vector<std::string> warnings;
};

// Three-phase total estimate: sum over F of y_k / pi#_k. Empty F gives 0.
double point_estimate(const NestedSample& sample, const ProbabilityChain& chain,
                      const UnitValueMap& y);

// Three-phase variance estimator. The three double sums run over all ordered
// pairs (k,p) in F x F, diagonal included:
//   term1 = sum [Delta_akp / (pi_akp pi_kp|S)] ybreve_k ybreve_p / pi_kp|R
//   term2 = sum [Delta_kp|S / pi_kp|S] ybreve*_k ybreve*_p / pi_kp|R
//   term3 = sum Delta_kp|R ybreve#_k ybreve#_p / pi_kp|R
// Requires pi_akp, pi_kp|S, pi_kp|R > 0 for every pair in F.
EstimateReport variance_estimate(const NestedSample& sample, const ProbabilityChain& chain,
                                 const UnitValueMap& y);

// Two-phase convenience: identical to variance_estimate with F = R and a
// census third phase.
EstimateReport two_phase_estimate(const IdSet& S, const IdSet& R,
                                  const PhaseProbabilities& phase1,
                                  const PhaseProbabilities& phase2, const UnitValueMap& y);

}  // namespace triphase
