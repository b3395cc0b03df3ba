#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "triphase/common.hpp"
#include "triphase/random.hpp"

namespace triphase {

// Default cap on the frame size for exhaustive support enumeration.
inline constexpr std::size_t kDefaultEnumerationCap = 12;

// Hard ceiling on materialized outcomes in any exhaustive enumeration.
inline constexpr std::size_t kDefaultMaxOutcomes = 10'000'000;

// ---------------------------------------------------------------------------
// Design kinds
// ---------------------------------------------------------------------------

// Simple random sampling without replacement: fixed size n from the frame.
struct SrsworDesign {
    std::size_t n = 0;
};

// Independent SRSWOR of size sizes[h] within each stratum h of the frame.
// stratum_of must label every unit the design may be applied to.
struct StratifiedSrsworDesign {
    std::map<std::string, std::size_t> sizes;
    std::map<UnitId, std::string> stratum_of;
};

// Independent per-unit selection; `per_unit` overrides the shared p.
struct BernoulliDesign {
    double p = 0.0;
    std::map<UnitId, double> per_unit;

    double prob_of(UnitId id) const {
        const auto it = per_unit.find(id);
        return it == per_unit.end() ? p : it->second;
    }
};

// Take the whole frame.
struct CensusDesign {};

// User-supplied first- and second-order inclusion probabilities.
// Joint entries are keyed by (min(k,p), max(k,p)).
struct TableDesign {
    std::map<UnitId, double> first;
    std::map<std::pair<UnitId, UnitId>, double> joint;
};

class PhaseDesign {
public:
    using Kind = std::variant<SrsworDesign, StratifiedSrsworDesign, BernoulliDesign,
                              CensusDesign, TableDesign>;

    static PhaseDesign srswor(std::size_t n);
    static PhaseDesign stratified_srswor(std::map<std::string, std::size_t> sizes,
                                         std::map<UnitId, std::string> stratum_of);
    static PhaseDesign bernoulli(double p);
    static PhaseDesign bernoulli(double p, std::map<UnitId, double> per_unit);
    static PhaseDesign census();
    // `joint_entries` lists (k, p, pi_kp); both orders accepted, conflicting
    // duplicates rejected. Diagonal entries, when present, must match pi_k.
    static PhaseDesign table(std::map<UnitId, double> first,
                             const std::vector<std::tuple<UnitId, UnitId, double>>& joint_entries);

    const Kind& kind() const { return kind_; }
    bool is_table() const { return std::holds_alternative<TableDesign>(kind_); }
    bool enumerable() const { return !is_table(); }

    // Throws ValidationError when the design cannot be applied to `frame`.
    void validate_on(const IdSet& frame) const;

    std::string describe() const;

private:
    explicit PhaseDesign(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

// ---------------------------------------------------------------------------
// Probabilities and support
// ---------------------------------------------------------------------------

// First- and second-order inclusion probabilities over one frame.
// Stored dense over frame positions; the diagonal of the joint matrix is
// pinned to the first-order vector (pi_kk = pi_k).
class PhaseProbabilities {
public:
    // `joint` is row-major size m*m and must be symmetric; its diagonal is
    // overwritten with `first`.
    PhaseProbabilities(IdSet frame, std::vector<double> first, std::vector<double> joint);

    static PhaseProbabilities census(const IdSet& frame);

    const IdSet& frame() const { return frame_; }
    std::size_t size() const { return frame_.size(); }

    std::size_t index_of(UnitId id) const;  // throws DataError when absent
    bool contains(UnitId id) const;

    double first(std::size_t i) const { return first_[i]; }
    double joint(std::size_t i, std::size_t j) const { return joint_[i * size() + j]; }
    double delta(std::size_t i, std::size_t j) const {
        return joint(i, j) - first(i) * first(j);
    }

    double first_of(UnitId k) const { return first(index_of(k)); }
    double joint_of(UnitId k, UnitId p) const { return joint(index_of(k), index_of(p)); }
    double delta_of(UnitId k, UnitId p) const { return delta(index_of(k), index_of(p)); }

    // Sum of first-order probabilities = expected sample size.
    double expected_size() const;

private:
    IdSet frame_;
    std::vector<double> first_;
    std::vector<double> joint_;
};

struct SupportOutcome {
    IdSet sample;
    double probability = 0.0;
};

// Full support of a design on a frame: every sample with positive probability.
struct SupportDistribution {
    std::vector<SupportOutcome> outcomes;

    double total_mass() const;
    double expected_size() const;
    // Sum of probabilities of outcomes containing k (and p).
    double marginal(UnitId k) const;
    double marginal_pair(UnitId k, UnitId p) const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// First/second-order inclusion probabilities of `design` on `frame`.
PhaseProbabilities inclusion_probabilities(const PhaseDesign& design, const IdSet& frame);

// One random realization. Deterministic given the stream state. Table designs
// carry no support distribution and cannot be drawn from.
IdSet draw(const PhaseDesign& design, const IdSet& frame, RandomStream& stream);

// Exhaustive support. Throws EnumerationLimitError when |frame| > max_frame
// or the support would exceed max_outcomes, and ValidationError for Table
// designs.
SupportDistribution enumerate_support(const PhaseDesign& design, const IdSet& frame,
                                      std::size_t max_frame = kDefaultEnumerationCap,
                                      std::size_t max_outcomes = kDefaultMaxOutcomes);

// Rejects samples that cannot be a realization of `design` on `frame`:
// non-subsets, wrong size for fixed-size designs, wrong per-stratum counts,
// census mismatches. Bernoulli and Table accept any subset.
void validate_realization(const PhaseDesign& design, const IdSet& frame, const IdSet& sample);

}  // namespace triphase
