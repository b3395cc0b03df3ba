#include "triphase/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>

namespace triphase {

namespace {

PhaseProbabilities probabilities_or_empty(const PhaseDesign& design, const IdSet& frame) {
    if (frame.empty()) return PhaseProbabilities({}, {}, {});
    return inclusion_probabilities(design, frame);
}

// sum of value[k] over ids
double sum_over(const IdSet& ids, const PhaseProbabilities& probs,
                const std::vector<double>& per_frame_value) {
    double s = 0.0;
    for (UnitId id : ids) s += per_frame_value[probs.index_of(id)];
    return s;
}

// sumsum over frame x frame of delta_kp * value_k * value_p (ordered pairs).
double quadratic_form(const PhaseProbabilities& probs, const std::vector<double>& value) {
    const std::size_t m = probs.size();
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            s += probs.delta(i, j) * value[i] * value[j];
        }
    }
    return s;
}

// Walks the full joint support; fn(S, R, F, probability, p2, p3) with p2/p3
// the conditional probabilities on the realized S and R.
template <typename Fn>
void for_each_outcome(const Population& pop, const PhaseDesign& d1, const PhaseDesign& d2,
                      const PhaseDesign& d3, const EnumerationLimits& limits, Fn&& fn) {
    if (pop.size() > limits.max_frame) {
        throw EnumerationLimitError("three-phase enumeration: population size " +
                                    std::to_string(pop.size()) + " exceeds cap " +
                                    std::to_string(limits.max_frame) +
                                    "; use Monte Carlo instead");
    }
    const SupportDistribution support1 =
        enumerate_support(d1, pop.ids(), limits.max_frame, limits.max_outcomes);
    std::size_t count = 0;
    for (const SupportOutcome& so : support1.outcomes) {
        const PhaseProbabilities p2 = probabilities_or_empty(d2, so.sample);
        const SupportDistribution support2 =
            enumerate_support(d2, so.sample, limits.max_frame, limits.max_outcomes);
        for (const SupportOutcome& ro : support2.outcomes) {
            const PhaseProbabilities p3 = probabilities_or_empty(d3, ro.sample);
            const SupportDistribution support3 =
                enumerate_support(d3, ro.sample, limits.max_frame, limits.max_outcomes);
            for (const SupportOutcome& fo : support3.outcomes) {
                if (++count > limits.max_outcomes) {
                    throw EnumerationLimitError(
                        "three-phase enumeration: outcome count exceeds " +
                        std::to_string(limits.max_outcomes) + "; use Monte Carlo instead");
                }
                fn(so.sample, ro.sample, fo.sample,
                   so.probability * ro.probability * fo.probability, p2, p3);
            }
        }
    }
}

}  // namespace

OutcomeDistribution enumerate_three_phase(const Population& pop, const PhaseDesign& d1,
                                          const PhaseDesign& d2, const PhaseDesign& d3,
                                          const EnumerationLimits& limits) {
    OutcomeDistribution dist;
    dist.population_total = pop.total();

    const PhaseProbabilities p1 = inclusion_probabilities(d1, pop.ids());
    const UnitValueMap y = pop.values();

    // First-phase expansions over U and the closed-form Var(A_S).
    std::vector<double> yb_u(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        yb_u[i] = pop.unit(i).y / p1.first(i);
    }
    dist.var_a_closed = quadratic_form(p1, yb_u);

    const IdSet* current_s = nullptr;
    const IdSet* current_r = nullptr;
    double sum_s_yb = 0.0;
    double sum_r_ybs = 0.0;
    double var_b_s = 0.0;
    double var_c_r = 0.0;
    std::vector<double> ybs_r;  // ybreve* per phase-2 frame position
    std::vector<double> ybsh_r;
    std::optional<ProbabilityChain> chain;

    for_each_outcome(pop, d1, d2, d3, limits,
                     [&](const IdSet& S, const IdSet& R, const IdSet& F, double prob,
                         const PhaseProbabilities& p2, const PhaseProbabilities& p3) {
                         if (current_s != &S) {
                             current_s = &S;
                             current_r = nullptr;  // R addresses are reused across S blocks
                             sum_s_yb = sum_over(S, p1, yb_u);
                         }
                         if (current_r != &R) {
                             current_r = &R;
                             // ybreve* and ybreve# per unit of R
                             ybs_r.assign(R.size(), 0.0);
                             ybsh_r.assign(R.size(), 0.0);
                             for (std::size_t i = 0; i < R.size(); ++i) {
                                 const double yb = yb_u[pop.index_of(R[i])];
                                 ybs_r[i] = yb / p2.first_of(R[i]);
                                 ybsh_r[i] = ybs_r[i] / p3.first(i);
                             }
                             sum_r_ybs = 0.0;
                             for (double v : ybs_r) sum_r_ybs += v;
                             // Var_S(B_R) needs ybreve* over all of S
                             std::vector<double> ybs_s(S.size());
                             for (std::size_t i = 0; i < S.size(); ++i) {
                                 ybs_s[i] = yb_u[pop.index_of(S[i])] / p2.first(i);
                             }
                             var_b_s = quadratic_form(p2, ybs_s);
                             var_c_r = quadratic_form(p3, ybsh_r);
                             chain.emplace(p1, p2, p3);
                         }

                         Outcome out;
                         out.sample = NestedSample{S, R, F};
                         out.probability = prob;
                         const EstimateReport report = variance_estimate(out.sample, *chain, y);
                         out.t_hat = report.point;
                         out.v_hat = report.variance;
                         out.term1 = report.term1;
                         out.term2 = report.term2;
                         out.term3 = report.term3;

                         double sum_f_ybsh = 0.0;
                         for (UnitId id : F) {
                             sum_f_ybsh += ybsh_r[p3.index_of(id)];
                         }
                         out.a_s = sum_s_yb - dist.population_total;
                         out.b_r = sum_r_ybs - sum_s_yb;
                         out.c_f = sum_f_ybsh - sum_r_ybs;
                         out.var_b_given_s = var_b_s;
                         out.var_c_given_r = var_c_r;
                         dist.outcomes.push_back(std::move(out));
                     });
    return dist;
}

ExpectationReport expectation_check(const OutcomeDistribution& dist, const Population& pop,
                                    const CheckTolerances& tol) {
    ExpectationReport rep;
    rep.population_total = pop.total();
    rep.var_a = dist.var_a_closed;

    NeumaierSum mass, e_t, e_v, e_vb, e_vc;
    for (const Outcome& o : dist.outcomes) {
        mass.add(o.probability);
        e_t.add(o.probability * o.t_hat);
        e_v.add(o.probability * o.v_hat);
        e_vb.add(o.probability * o.var_b_given_s);
        e_vc.add(o.probability * o.var_c_given_r);
    }
    rep.total_mass = mass.value();
    rep.e_t_hat = e_t.value();
    rep.e_v_hat = e_v.value();
    rep.e_var_b = e_vb.value();
    rep.e_var_c = e_vc.value();

    NeumaierSum var;
    double max_gap = 0.0;
    for (const Outcome& o : dist.outcomes) {
        const double dev = o.t_hat - rep.e_t_hat;
        var.add(o.probability * dev * dev);
        max_gap = std::max(max_gap,
                           relative_gap(o.a_s + o.b_r + o.c_f, o.t_hat - rep.population_total));
    }
    rep.var_t_hat = var.value();
    rep.max_decomposition_gap = max_gap;

    auto mk = [](std::string name, double lhs, double rhs, double tolerance) {
        CheckResult c;
        c.name = std::move(name);
        c.lhs = lhs;
        c.rhs = rhs;
        c.rel_gap = relative_gap(lhs, rhs);
        c.tolerance = tolerance;
        c.pass = c.rel_gap < tolerance;
        return c;
    };
    rep.checks.push_back(mk("total_probability_mass", rep.total_mass, 1.0, tol.mass));
    rep.checks.push_back(mk("point_unbiasedness", rep.e_t_hat, rep.population_total, tol.point));
    rep.checks.push_back(mk("variance_unbiasedness", rep.e_v_hat, rep.var_t_hat, tol.variance));
    rep.checks.push_back(mk("variance_decomposition", rep.var_a + rep.e_var_b + rep.e_var_c,
                            rep.var_t_hat, tol.variance));
    rep.checks.push_back(
        mk("outcome_decomposition_max_gap", rep.max_decomposition_gap, 0.0, tol.decomposition));

    rep.all_pass = true;
    for (const CheckResult& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

IdentityReport arbitrary_constant_identity(const Population& pop, const PhaseDesign& d1,
                                           const PhaseDesign& d2, const PhaseDesign& d3,
                                           const std::vector<double>& c,
                                           const EnumerationLimits& limits) {
    const std::size_t n = pop.size();
    if (c.size() != n * n) {
        throw ValidationError("constant identity: c must be N x N row-major");
    }

    // Left side: E{ E_S[ E( sumsum_F c_kp / pi_kp|R | R ) ] } by enumeration.
    NeumaierSum lhs;
    for_each_outcome(pop, d1, d2, d3, limits,
                     [&](const IdSet&, const IdSet&, const IdSet& F, double prob,
                         const PhaseProbabilities&, const PhaseProbabilities& p3) {
                         double inner = 0.0;
                         for (UnitId k : F) {
                             const std::size_t ik = pop.index_of(k);
                             const std::size_t i3 = p3.index_of(k);
                             for (UnitId p : F) {
                                 inner += c[ik * n + pop.index_of(p)] /
                                          p3.joint(i3, p3.index_of(p));
                             }
                         }
                         lhs.add(prob * inner);
                     });

    // Right side: sumsum_U pi*_kp c_kp. pi_kp|S must be invariant across the
    // realized S containing the pair; verified while collecting.
    const PhaseProbabilities p1 = inclusion_probabilities(d1, pop.ids());
    const SupportDistribution support1 =
        enumerate_support(d1, pop.ids(), limits.max_frame, limits.max_outcomes);
    std::vector<double> pi2(n * n, -1.0);  // -1 = never co-sampled
    for (const SupportOutcome& so : support1.outcomes) {
        if (so.sample.empty()) continue;
        const PhaseProbabilities p2 = inclusion_probabilities(d2, so.sample);
        for (std::size_t a = 0; a < so.sample.size(); ++a) {
            const std::size_t ia = pop.index_of(so.sample[a]);
            for (std::size_t b = 0; b < so.sample.size(); ++b) {
                const std::size_t ib = pop.index_of(so.sample[b]);
                const double v = p2.joint(a, b);
                double& slot = pi2[ia * n + ib];
                if (slot < 0.0) {
                    slot = v;
                } else if (relative_gap(v, slot) > 1e-12) {
                    throw ValidationError(
                        "constant identity: pi_kp|S depends on the realized S for pair (" +
                        std::to_string(so.sample[a]) + "," + std::to_string(so.sample[b]) +
                        "); the right side is not defined for this design pair");
                }
            }
        }
    }
    NeumaierSum rhs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double pi_a = p1.joint(i, j);
            if (pi_a == 0.0) continue;  // pair never co-sampled, contributes 0
            if (pi2[i * n + j] < 0.0) {
                throw ValidationError(
                    "constant identity: pair with positive pi_akp never realized in the "
                    "phase-1 support");
            }
            rhs.add(pi_a * pi2[i * n + j] * c[i * n + j]);
        }
    }

    IdentityReport rep;
    rep.lhs = lhs.value();
    rep.rhs = rhs.value();
    rep.rel_gap = relative_gap(rep.lhs, rep.rhs);
    return rep;
}

std::vector<double> random_pair_constants(std::size_t n, std::uint64_t seed,
                                          std::uint64_t index) {
    RandomStream stream = RandomStream::substream(seed, index);
    std::vector<double> c(n * n);
    for (double& v : c) v = stream.uniform(-1.0, 1.0);
    return c;
}

MonteCarloReport monte_carlo(const Population& pop, const PhaseDesign& d1, const PhaseDesign& d2,
                             const PhaseDesign& d3, const MonteCarloOptions& options) {
    if (options.reps == 0) throw ValidationError("monte carlo: reps must be >= 1");
    const std::uint64_t reps = options.reps;
    const UnitValueMap y = pop.values();
    const PhaseProbabilities p1 = inclusion_probabilities(d1, pop.ids());

    std::vector<double> t(reps), v(reps);
    auto run_block = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t r = lo; r < hi; ++r) {
            RandomStream stream = RandomStream::substream(options.seed, r);
            const IdSet S = draw(d1, pop.ids(), stream);
            const IdSet R = draw(d2, S, stream);
            const IdSet F = draw(d3, R, stream);
            const ProbabilityChain chain(p1, probabilities_or_empty(d2, S),
                                         probabilities_or_empty(d3, R));
            const EstimateReport rep = variance_estimate(NestedSample{S, R, F}, chain, y);
            t[r] = rep.point;
            v[r] = rep.variance;
        }
    };

    unsigned threads = options.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, reps));
    if (threads <= 1) {
        run_block(0, reps);
    } else {
        // Replicate r always uses stream (seed, r) and writes slot r, so the
        // partition cannot affect any result bit.
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (reps + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::uint64_t lo = std::min<std::uint64_t>(w * chunk, reps);
            const std::uint64_t hi = std::min<std::uint64_t>(lo + chunk, reps);
            if (lo < hi) pool.emplace_back(run_block, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    MonteCarloReport rep;
    rep.reps = reps;
    rep.population_total = pop.total();

    NeumaierSum sum_t, sum_v;
    for (std::uint64_t r = 0; r < reps; ++r) {
        sum_t.add(t[r]);
        sum_v.add(v[r]);
    }
    rep.mean_t = sum_t.value() / static_cast<double>(reps);
    rep.mean_v = sum_v.value() / static_cast<double>(reps);

    if (reps >= 2) {
        NeumaierSum m2_t, m4_t, m2_v;
        for (std::uint64_t r = 0; r < reps; ++r) {
            const double dt = t[r] - rep.mean_t;
            m2_t.add(dt * dt);
            m4_t.add(dt * dt * dt * dt);
            const double dv = v[r] - rep.mean_v;
            m2_v.add(dv * dv);
        }
        const double nn = static_cast<double>(reps);
        const double s2_t = m2_t.value() / (nn - 1.0);
        const double s2_v = m2_v.value() / (nn - 1.0);
        const double m4 = m4_t.value() / nn;
        rep.emp_var_t = s2_t;
        rep.se_mean_t = std::sqrt(s2_t / nn);
        rep.se_mean_v = std::sqrt(s2_v / nn);
        // SE of the sample variance via the fourth central moment.
        const double var_s2 = (m4 - s2_t * s2_t * (nn - 3.0) / (nn - 1.0)) / nn;
        rep.se_emp_var_t = var_s2 > 0.0 ? std::sqrt(var_s2) : 0.0;
    }
    return rep;
}

}  // namespace triphase
