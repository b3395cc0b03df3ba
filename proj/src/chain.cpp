#include "triphase/chain.hpp"

namespace triphase {

void NestedSample::validate() const {
    if (!is_sorted_unique(S) || !is_sorted_unique(R) || !is_sorted_unique(F)) {
        throw ValidationError("nested sample: sets must be sorted ascending, unique");
    }
    if (!is_subset(F, R)) throw ValidationError("nested sample: F is not a subset of R");
    if (!is_subset(R, S)) throw ValidationError("nested sample: R is not a subset of S");
}

void NestedSample::validate_within(const IdSet& frame) const {
    validate();
    if (!is_subset(S, frame)) throw ValidationError("nested sample: S is not a subset of the frame");
}

ProbabilityChain::ProbabilityChain(PhaseProbabilities phase1, PhaseProbabilities phase2,
                                   PhaseProbabilities phase3)
    : phase1_(std::move(phase1)), phase2_(std::move(phase2)), phase3_(std::move(phase3)) {
    if (!is_subset(phase2_.frame(), phase1_.frame())) {
        throw ValidationError("probability chain: phase-2 frame not within phase-1 frame");
    }
    if (!is_subset(phase3_.frame(), phase2_.frame())) {
        throw ValidationError("probability chain: phase-3 frame not within phase-2 frame");
    }
}

double ProbabilityChain::pi_star(UnitId k) const {
    return phase1_.first_of(k) * phase2_.first_of(k);
}

double ProbabilityChain::pi_star(UnitId k, UnitId p) const {
    return phase1_.joint_of(k, p) * phase2_.joint_of(k, p);
}

double ProbabilityChain::delta_star(UnitId k, UnitId p) const {
    return pi_star(k, p) - pi_star(k) * pi_star(p);
}

double ProbabilityChain::pi_sharp(UnitId k) const {
    return phase1_.first_of(k) * phase2_.first_of(k) * phase3_.first_of(k);
}

double ProbabilityChain::pi_sharp(UnitId k, UnitId p) const {
    return pi_star(k, p) * phase3_.joint_of(k, p);
}

double ProbabilityChain::delta_sharp(UnitId k, UnitId p) const {
    return pi_sharp(k, p) - pi_sharp(k) * pi_sharp(p);
}

double ProbabilityChain::expanded_delta_a(UnitId k, UnitId p) const {
    const double joint = phase1_.joint_of(k, p);
    if (!(joint > 0.0)) {
        throw ValidationError("expanded delta: zero phase-1 joint probability for pair (" +
                              std::to_string(k) + "," + std::to_string(p) + ")");
    }
    return phase1_.delta_of(k, p) / joint;
}

double ProbabilityChain::expanded_delta_star(UnitId k, UnitId p) const {
    const double joint = pi_star(k, p);
    if (!(joint > 0.0)) {
        throw ValidationError("expanded delta: zero composite pair probability for pair (" +
                              std::to_string(k) + "," + std::to_string(p) + ")");
    }
    return phase1_.delta_of(k, p) / joint;
}

double ProbabilityChain::expanded_delta_phase2(UnitId k, UnitId p) const {
    const double joint = phase2_.joint_of(k, p);
    if (!(joint > 0.0)) {
        throw ValidationError("expanded delta: zero phase-2 joint probability for pair (" +
                              std::to_string(k) + "," + std::to_string(p) + ")");
    }
    return phase2_.delta_of(k, p) / joint;
}

ExpandedValues expanded_values(const ProbabilityChain& chain, const IdSet& ids,
                               const UnitValueMap& y) {
    ExpandedValues out;
    out.ids = ids;
    out.ybreve.reserve(ids.size());
    out.ybreve_star.reserve(ids.size());
    out.ybreve_sharp.reserve(ids.size());
    for (UnitId id : ids) {
        const auto it = y.find(id);
        if (it == y.end()) {
            throw DataError("expanded values: no y value for unit " + std::to_string(id));
        }
        const double yb = it->second / chain.phase1().first_of(id);
        const double ybs = yb / chain.phase2().first_of(id);
        const double ybsh = ybs / chain.phase3().first_of(id);
        out.ybreve.push_back(yb);
        out.ybreve_star.push_back(ybs);
        out.ybreve_sharp.push_back(ybsh);
    }
    return out;
}

}  // namespace triphase
