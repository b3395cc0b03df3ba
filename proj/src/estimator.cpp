#include "triphase/estimator.hpp"

namespace triphase {

namespace {

std::string pair_str(UnitId k, UnitId p) {
    return "(" + std::to_string(k) + "," + std::to_string(p) + ")";
}

double y_of(const UnitValueMap& y, UnitId id) {
    const auto it = y.find(id);
    if (it == y.end()) throw DataError("estimator: no y value for unit " + std::to_string(id));
    return it->second;
}

}  // namespace

double point_estimate(const NestedSample& sample, const ProbabilityChain& chain,
                      const UnitValueMap& y) {
    sample.validate();
    double total = 0.0;
    for (UnitId k : sample.F) {
        const double pi_sharp = chain.phase1().first_of(k) * chain.phase2().first_of(k) *
                                chain.phase3().first_of(k);
        total += y_of(y, k) / pi_sharp;
    }
    return total;
}

EstimateReport variance_estimate(const NestedSample& sample, const ProbabilityChain& chain,
                                 const UnitValueMap& y) {
    sample.validate();
    const std::size_t f = sample.F.size();

    // Per-unit data over F, ascending id order.
    std::vector<std::size_t> i1(f), i2(f), i3(f);
    std::vector<double> fa(f), fs(f), fr(f), yb(f), ybs(f), ybsh(f);
    for (std::size_t a = 0; a < f; ++a) {
        const UnitId k = sample.F[a];
        i1[a] = chain.phase1().index_of(k);
        i2[a] = chain.phase2().index_of(k);
        i3[a] = chain.phase3().index_of(k);
        fa[a] = chain.phase1().first(i1[a]);
        fs[a] = chain.phase2().first(i2[a]);
        fr[a] = chain.phase3().first(i3[a]);
        const double yk = y_of(y, k);
        yb[a] = yk / fa[a];
        ybs[a] = yb[a] / fs[a];
        ybsh[a] = ybs[a] / fr[a];
    }

    // Ordered pairs over F x F including the diagonal; plain left-to-right
    // accumulation with k outer, p inner. This order is part of the contract
    // relied on by the exact two-phase reduction.
    EstimateReport report;
    for (std::size_t a = 0; a < f; ++a) {
        for (std::size_t b = 0; b < f; ++b) {
            const double ja = chain.phase1().joint(i1[a], i1[b]);
            const double js = chain.phase2().joint(i2[a], i2[b]);
            const double jr = chain.phase3().joint(i3[a], i3[b]);
            if (!(ja > 0.0)) {
                throw ValidationError("variance undefined: zero phase-1 pair probability for " +
                                      pair_str(sample.F[a], sample.F[b]));
            }
            if (!(js > 0.0)) {
                throw ValidationError("variance undefined: zero phase-2 pair probability for " +
                                      pair_str(sample.F[a], sample.F[b]));
            }
            if (!(jr > 0.0)) {
                throw ValidationError("variance undefined: zero phase-3 pair probability for " +
                                      pair_str(sample.F[a], sample.F[b]));
            }
            const double da = ja - fa[a] * fa[b];
            const double ds = js - fs[a] * fs[b];
            const double dr = jr - fr[a] * fr[b];
            report.term1 += da / (ja * js) * yb[a] * yb[b] / jr;
            report.term2 += ds / js * ybs[a] * ybs[b] / jr;
            report.term3 += dr * ybsh[a] * ybsh[b] / jr;
        }
    }
    report.point = point_estimate(sample, chain, y);
    report.variance = report.term1 + report.term2 + report.term3;
    if (report.variance < 0.0) {
        report.warnings.push_back(
            "negative variance estimate; reported as-is to preserve design unbiasedness");
    }
    return report;
}

EstimateReport two_phase_estimate(const IdSet& S, const IdSet& R,
                                  const PhaseProbabilities& phase1,
                                  const PhaseProbabilities& phase2, const UnitValueMap& y) {
    NestedSample sample{S, R, R};
    ProbabilityChain chain(phase1, phase2, PhaseProbabilities::census(R));
    return variance_estimate(sample, chain, y);
}

}  // namespace triphase
