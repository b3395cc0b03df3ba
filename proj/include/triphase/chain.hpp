#pragma once

#include <vector>

#include "triphase/common.hpp"
#include "triphase/designs.hpp"

namespace triphase {

// Realized index chain F ⊆ R ⊆ S of a three-phase draw.
struct NestedSample {
    IdSet S;
    IdSet R;
    IdSet F;

    // Throws ValidationError unless F ⊆ R ⊆ S and each set is sorted unique.
    void validate() const;
    // Additionally checks S ⊆ frame.
    void validate_within(const IdSet& frame) const;
};

// Per-phase inclusion probabilities plus the composite quantities built from
// them. phase1 lives on the full frame, phase2 on S (conditional on S),
// phase3 on R (conditional on R). Composite probabilities are plain products:
//   pi*_k  = pi_ak pi_k|S        pi*_kp  = pi_akp pi_kp|S
//   pi#_k  = pi*_k pi_k|R        pi#_kp  = pi*_kp pi_kp|R
class ProbabilityChain {
public:
    ProbabilityChain(PhaseProbabilities phase1, PhaseProbabilities phase2,
                     PhaseProbabilities phase3);

    const PhaseProbabilities& phase1() const { return phase1_; }
    const PhaseProbabilities& phase2() const { return phase2_; }
    const PhaseProbabilities& phase3() const { return phase3_; }

    // Composites keyed by unit id; unit must belong to the required frames.
    double pi_star(UnitId k) const;
    double pi_star(UnitId k, UnitId p) const;
    double delta_star(UnitId k, UnitId p) const;
    double pi_sharp(UnitId k) const;
    double pi_sharp(UnitId k, UnitId p) const;
    double delta_sharp(UnitId k, UnitId p) const;

    // Expanded delta quantities:
    //   expanded_delta_a       = Delta_akp / pi_akp
    //   expanded_delta_star    = Delta_akp / pi*_kp
    //   expanded_delta_phase2  = Delta_kp|S / pi_kp|S
    double expanded_delta_a(UnitId k, UnitId p) const;
    double expanded_delta_star(UnitId k, UnitId p) const;
    double expanded_delta_phase2(UnitId k, UnitId p) const;

private:
    PhaseProbabilities phase1_;
    PhaseProbabilities phase2_;
    PhaseProbabilities phase3_;
};

// Horvitz-Thompson expansions of y through the phases, aligned with `ids`:
//   ybreve_k       = y_k / pi_ak          (valid for k in S)
//   ybreve_star_k  = ybreve_k / pi_k|S    (valid for k in R)
//   ybreve_sharp_k = ybreve_star_k / pi_k|R  (valid for k in F)
struct ExpandedValues {
    IdSet ids;
    std::vector<double> ybreve;
    std::vector<double> ybreve_star;
    std::vector<double> ybreve_sharp;
};

// Expansions for every id in `ids` (ids must lie in all three phase frames).
ExpandedValues expanded_values(const ProbabilityChain& chain, const IdSet& ids,
                               const UnitValueMap& y);

}  // namespace triphase
