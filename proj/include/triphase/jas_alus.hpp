#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triphase/chain.hpp"
#include "triphase/common.hpp"

namespace triphase {

// Tract of a segment with its tract-to-farm ratio, in [0,1].
struct Tract {
    std::int64_t tract_id = 0;
    double ratio = 0.0;
};

// Sampled segment. `accurate` marks segments whose first-phase data is kept
// as-is (they feed T1'); the rest are the second-phase subsample and carry a
// response expansion factor r >= 1.
struct Segment {
    std::int64_t segment_id = 0;
    double r = 1.0;
    bool accurate = false;
    std::vector<Tract> tracts;

    // c_ijk: sum of tract ratios.
    double tract_total() const {
        double c = 0.0;
        for (const Tract& t : tracts) c += t.ratio;
        return c;
    }
};

// Substratum j within stratum i: expansion factors e (phase 1) and a
// (phase 2), the segment counts n (phase-1 sample) and n_prime (second-phase
// subsample), and the segment list itself.
struct Substratum {
    std::string stratum;
    std::string substratum;
    double e = 1.0;
    double a = 1.0;
    std::size_t n = 0;
    std::size_t n_prime = 0;
    std::vector<Segment> segments;
};

// Stratified two-phase frame with non-response expansion factors.
// Substrata are kept sorted by (stratum, substratum) and segments by id.
class JasAlusFrame {
public:
    explicit JasAlusFrame(std::vector<Substratum> substrata);

    const std::vector<Substratum>& substrata() const { return substrata_; }

private:
    std::vector<Substratum> substrata_;
};

struct SubstratumVariance {
    std::string stratum;
    std::string substratum;
    double v_ij = 0.0;
};

// Both forms of the subsample variance estimator. `simplified_total` is the
// two-term form and the per-substratum decomposition sums to it exactly;
// `five_term_total` is the expanded form kept for cross-validation.
struct VarT2Result {
    double simplified_total = 0.0;
    double five_term_total = 0.0;
    std::vector<SubstratumVariance> per_substratum;
    std::vector<std::string> warnings;
};

struct T2Point {
    double t1_prime = 0.0;  // accurate segments, first-phase expansion only
    double t2_prime = 0.0;  // subsampled segments, triple expansion
    double t2 = 0.0;        // t1_prime + t2_prime
};

// Probability chain over the subsampled segments, consumable by the general
// three-phase estimator. S = R = F = all subsampled segments, with synthetic
// unit ids in frame order; `y` maps each id to its segment total.
struct JasAlusChain {
    NestedSample sample;
    ProbabilityChain chain;
    UnitValueMap y;
};

struct JasAlusReport {
    double t1 = 0.0;
    double var_t1 = 0.0;
    double t1_prime = 0.0;
    double t2_prime = 0.0;
    double t2 = 0.0;
    double var_t1_prime = 0.0;
    double var_t2prime_hat = 0.0;
    double var_t2prime_five_term = 0.0;
    double var_t2 = 0.0;  // var_t1_prime + var_t2prime_hat
    std::vector<SubstratumVariance> substrata;
    std::vector<std::string> warnings;
};

// Stratified expansion estimator over all segments:
//   T1 = sum_ij e_ij sum_k c_ijk.
double t1_estimate(const JasAlusFrame& frame);

// Kott's variance of T1 over all segments:
//   Var(T1) = sum_ij (1 - 1/e_ij)/(1 - 1/n_ij) sum_k (c'_ijk - mean)^2
// with c'_ijk = e_ij c_ijk. Substrata with e = 1 contribute 0; a substratum
// with a single segment and e > 1 is an error.
double var_t1(const JasAlusFrame& frame);

// Two-phase point estimate with non-response expansion:
//   T2 = T1'(accurate segments) + sum_ij e_ij a_ij sum_k r_ijk c_ijk.
T2Point t2_estimate(const JasAlusFrame& frame);

// Variance estimator of T2' in simplified two-term and five-term forms:
//   diag  = sum_ij sum_k a e r_k (a e r_k - 1) c_k^2
//   cross = sum_ij e a (1 - e a)/(n'-1) sum_{k<p} (r_k c_k)(r_p c_p)
// Substrata with a single subsampled segment skip the cross term with a
// warning; substrata with none contribute 0.
VarT2Result var_t2prime_hat(const JasAlusFrame& frame);

// Homogeneous-substratum closed form
//   V_ij = e a r n' [r(ea + 1) - 2] c^2 / 2,
// nonnegative whenever e, a, r >= 1. Requires n' >= 2 and c >= 0.
double special_case_vij(double e, double a, double r, std::size_t n_prime, double c);

// Per-pair inclusion probabilities of the two sampling phases plus the
// response phase, over the subsampled segments. Same-substratum pair
// probabilities are emitted so that the ordered-pair evaluation of the
// general three-phase variance estimator reproduces var_t2prime_hat, whose
// printed cross terms count each unordered pair once.
JasAlusChain jas_alus_probability_map(const JasAlusFrame& frame);

// Full report: T1 and its variance, the T2 decomposition, both variance
// forms, Var(T2) = Var(T1') + Var(T2'), and per-substratum contributions.
JasAlusReport jas_alus_report(const JasAlusFrame& frame);

}  // namespace triphase
