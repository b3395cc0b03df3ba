#include "triphase/jas_alus.hpp"

#include <algorithm>
#include <cmath>

namespace triphase {

namespace {

std::string sub_label(const Substratum& s) { return s.stratum + "/" + s.substratum; }

// Kott's formula over the segments selected by `keep`. The per-substratum
// segment count entering (1 - 1/n) is the count of kept segments. A lone
// kept segment with e > 1 leaves the formula undefined: with `warnings` the
// substratum is skipped and noted, otherwise it is an error.
template <typename Keep>
double kott_variance(const JasAlusFrame& frame, Keep&& keep,
                     std::vector<std::string>* warnings = nullptr) {
    double total = 0.0;
    for (const Substratum& sub : frame.substrata()) {
        std::vector<double> expanded;  // c'_ijk
        for (const Segment& seg : sub.segments) {
            if (keep(seg)) expanded.push_back(sub.e * seg.tract_total());
        }
        if (expanded.empty()) continue;
        if (sub.e == 1.0) continue;  // factor (1 - 1/e) vanishes
        if (expanded.size() == 1) {
            if (warnings) {
                warnings->push_back("substratum " + sub_label(sub) +
                                    ": single accurate segment with e > 1, its variance "
                                    "contribution is skipped");
                continue;
            }
            throw ValidationError("kott variance: substratum " + sub_label(sub) +
                                  " has a single segment with e > 1; variance undefined");
        }
        double mean = 0.0;
        for (double c : expanded) mean += c;
        mean /= static_cast<double>(expanded.size());
        double ss = 0.0;
        for (double c : expanded) ss += (c - mean) * (c - mean);
        const double n = static_cast<double>(expanded.size());
        total += (1.0 - 1.0 / sub.e) / (1.0 - 1.0 / n) * ss;
    }
    return total;
}

}  // namespace

JasAlusFrame::JasAlusFrame(std::vector<Substratum> substrata) : substrata_(std::move(substrata)) {
    std::sort(substrata_.begin(), substrata_.end(), [](const Substratum& x, const Substratum& y) {
        return std::tie(x.stratum, x.substratum) < std::tie(y.stratum, y.substratum);
    });
    for (std::size_t i = 0; i < substrata_.size(); ++i) {
        Substratum& sub = substrata_[i];
        if (i > 0 && substrata_[i - 1].stratum == sub.stratum &&
            substrata_[i - 1].substratum == sub.substratum) {
            throw ValidationError("jas-alus frame: duplicate substratum " + sub_label(sub));
        }
        if (!(sub.e >= 1.0) || !(sub.a >= 1.0)) {
            throw ValidationError("jas-alus frame: expansion factors must be >= 1 in substratum " +
                                  sub_label(sub));
        }
        std::sort(sub.segments.begin(), sub.segments.end(),
                  [](const Segment& x, const Segment& y) { return x.segment_id < y.segment_id; });
        std::size_t alus_count = 0;
        for (std::size_t k = 0; k < sub.segments.size(); ++k) {
            const Segment& seg = sub.segments[k];
            if (k > 0 && sub.segments[k - 1].segment_id == seg.segment_id) {
                throw ValidationError("jas-alus frame: duplicate segment id " +
                                      std::to_string(seg.segment_id) + " in substratum " +
                                      sub_label(sub));
            }
            if (!(seg.r >= 1.0)) {
                throw ValidationError("jas-alus frame: response factor < 1 for segment " +
                                      std::to_string(seg.segment_id) + " in substratum " +
                                      sub_label(sub));
            }
            if (!seg.accurate) ++alus_count;
            for (const Tract& t : seg.tracts) {
                if (!(t.ratio >= 0.0) || t.ratio > 1.0) {
                    throw ValidationError("jas-alus frame: tract ratio outside [0,1] for tract " +
                                          std::to_string(t.tract_id) + " of segment " +
                                          std::to_string(seg.segment_id));
                }
            }
        }
        if (sub.n != sub.segments.size()) {
            throw ValidationError("jas-alus frame: substratum " + sub_label(sub) + " declares n=" +
                                  std::to_string(sub.n) + " but lists " +
                                  std::to_string(sub.segments.size()) + " segments");
        }
        if (sub.n_prime != alus_count) {
            throw ValidationError("jas-alus frame: substratum " + sub_label(sub) +
                                  " declares n_prime=" + std::to_string(sub.n_prime) +
                                  " but lists " + std::to_string(alus_count) +
                                  " subsampled segments");
        }
    }
}

double t1_estimate(const JasAlusFrame& frame) {
    double total = 0.0;
    for (const Substratum& sub : frame.substrata()) {
        double c_sum = 0.0;
        for (const Segment& seg : sub.segments) c_sum += seg.tract_total();
        total += sub.e * c_sum;
    }
    return total;
}

double var_t1(const JasAlusFrame& frame) {
    return kott_variance(frame, [](const Segment&) { return true; });
}

T2Point t2_estimate(const JasAlusFrame& frame) {
    T2Point out;
    for (const Substratum& sub : frame.substrata()) {
        double accurate_sum = 0.0;
        double alus_sum = 0.0;  // sum_k r_k c_k
        for (const Segment& seg : sub.segments) {
            if (seg.accurate) {
                accurate_sum += seg.tract_total();
            } else {
                alus_sum += seg.r * seg.tract_total();
            }
        }
        out.t1_prime += sub.e * accurate_sum;
        out.t2_prime += sub.e * sub.a * alus_sum;
    }
    out.t2 = out.t1_prime + out.t2_prime;
    return out;
}

VarT2Result var_t2prime_hat(const JasAlusFrame& frame) {
    VarT2Result out;
    for (const Substratum& sub : frame.substrata()) {
        const double e = sub.e;
        const double a = sub.a;
        std::vector<double> c, rc;  // segment totals and r_k c_k, subsampled only
        std::vector<double> r;
        for (const Segment& seg : sub.segments) {
            if (seg.accurate) continue;
            const double ck = seg.tract_total();
            c.push_back(ck);
            r.push_back(seg.r);
            rc.push_back(seg.r * ck);
        }
        const std::size_t np = c.size();
        if (np == 0) continue;

        double cross_pairs = 0.0;  // sum_{k<p} (r_k c_k)(r_p c_p)
        for (std::size_t k = 0; k < np; ++k) {
            for (std::size_t p = k + 1; p < np; ++p) cross_pairs += rc[k] * rc[p];
        }

        // simplified two-term form
        double diag = 0.0;
        for (std::size_t k = 0; k < np; ++k) {
            diag += a * e * r[k] * (a * e * r[k] - 1.0) * c[k] * c[k];
        }
        double v_ij = diag;
        if (np >= 2) {
            v_ij += e * a * (1.0 - e * a) / (static_cast<double>(np) - 1.0) * cross_pairs;
        } else {
            out.warnings.push_back("substratum " + sub_label(sub) +
                                   ": single subsampled segment, cross term skipped");
        }
        out.per_substratum.push_back({sub.stratum, sub.substratum, v_ij});
        out.simplified_total += v_ij;

        // five-term form, as printed
        double sum_rcc = 0.0;     // sum_k r_k c_k^2
        double sum_rr1cc = 0.0;   // sum_k r_k (r_k - 1) c_k^2
        for (std::size_t k = 0; k < np; ++k) {
            sum_rcc += r[k] * c[k] * c[k];
            sum_rr1cc += r[k] * (r[k] - 1.0) * c[k] * c[k];
        }
        double five = a * e * (e - 1.0) * sum_rcc            // phase-1 diagonal
                      + e * e * a * (a - 1.0) * sum_rcc      // phase-2 diagonal
                      + e * e * a * a * sum_rr1cc;           // response diagonal
        if (np >= 2) {
            const double inv = 1.0 / (static_cast<double>(np) - 1.0);
            five += e * a * (1.0 - e) * inv * cross_pairs;
            five += e * e * a * (1.0 - a) * inv * cross_pairs;
        }
        out.five_term_total += five;
    }
    return out;
}

double special_case_vij(double e, double a, double r, std::size_t n_prime, double c) {
    if (!(e >= 1.0) || !(a >= 1.0) || !(r >= 1.0)) {
        throw ValidationError("special case: expansion factors must be >= 1");
    }
    if (n_prime < 2) throw ValidationError("special case: n_prime must be >= 2");
    if (!(c >= 0.0)) throw ValidationError("special case: c must be >= 0");
    return 0.5 * e * a * r * static_cast<double>(n_prime) * (r * (e * a + 1.0) - 2.0) * c * c;
}

JasAlusChain jas_alus_probability_map(const JasAlusFrame& frame) {
    // Subsampled segments in frame order get synthetic unit ids 1..K.
    struct Entry {
        double e, a, r, c;
        std::size_t sub_index;
        double pair1;  // same-substratum phase-1 pair probability
        double pair2;  // same-substratum phase-2 pair probability
    };
    std::vector<Entry> entries;
    std::size_t sub_index = 0;
    for (const Substratum& sub : frame.substrata()) {
        // The printed cross terms count each unordered pair once while the
        // general estimator sums ordered pairs, so each pair must carry half
        // the off-diagonal weight. That is what the pair probabilities below
        // produce, via n -> 2n' - 1 in the same-substratum closed forms; the
        // first-order and diagonal quantities are unchanged.
        const double n2 = 2.0 * static_cast<double>(sub.n_prime) - 1.0;
        // Only substrata with at least two subsampled segments have
        // same-substratum pairs; guard the degenerate denominators.
        const double pair1 =
            sub.n_prime >= 2 ? (n2 * sub.a - 1.0) / (sub.e * (n2 * sub.a * sub.e - 1.0)) : 0.0;
        const double pair2 =
            sub.n_prime >= 2 ? (n2 - 1.0) / (sub.a * (n2 * sub.a - 1.0)) : 0.0;
        for (const Segment& seg : sub.segments) {
            if (seg.accurate) continue;
            entries.push_back(
                {sub.e, sub.a, seg.r, seg.tract_total(), sub_index, pair1, pair2});
        }
        ++sub_index;
    }

    const std::size_t m = entries.size();
    IdSet ids(m);
    for (std::size_t i = 0; i < m; ++i) ids[i] = static_cast<UnitId>(i + 1);

    std::vector<double> first1(m), first2(m), first3(m);
    for (std::size_t i = 0; i < m; ++i) {
        first1[i] = 1.0 / entries[i].e;
        first2[i] = 1.0 / entries[i].a;
        first3[i] = 1.0 / entries[i].r;
    }
    std::vector<double> joint1(m * m), joint2(m * m), joint3(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (entries[i].sub_index == entries[j].sub_index && i != j) {
                joint1[i * m + j] = entries[i].pair1;
                joint2[i * m + j] = entries[i].pair2;
            } else {
                // across substrata the phases select independently
                joint1[i * m + j] = first1[i] * first1[j];
                joint2[i * m + j] = first2[i] * first2[j];
            }
            joint3[i * m + j] = first3[i] * first3[j];  // independent response
        }
    }

    JasAlusChain out{
        NestedSample{ids, ids, ids},
        ProbabilityChain(PhaseProbabilities(ids, first1, std::move(joint1)),
                         PhaseProbabilities(ids, first2, std::move(joint2)),
                         PhaseProbabilities(ids, first3, std::move(joint3))),
        {}};
    for (std::size_t i = 0; i < m; ++i) out.y.emplace(ids[i], entries[i].c);
    return out;
}

JasAlusReport jas_alus_report(const JasAlusFrame& frame) {
    JasAlusReport rep;
    rep.t1 = t1_estimate(frame);
    rep.var_t1 = var_t1(frame);
    const T2Point point = t2_estimate(frame);
    rep.t1_prime = point.t1_prime;
    rep.t2_prime = point.t2_prime;
    rep.t2 = point.t2;
    VarT2Result var = var_t2prime_hat(frame);
    rep.warnings = std::move(var.warnings);
    rep.var_t1_prime =
        kott_variance(frame, [](const Segment& s) { return s.accurate; }, &rep.warnings);
    rep.var_t2prime_hat = var.simplified_total;
    rep.var_t2prime_five_term = var.five_term_total;
    rep.var_t2 = rep.var_t1_prime + rep.var_t2prime_hat;
    rep.substrata = std::move(var.per_substratum);
    return rep;
}

}  // namespace triphase
