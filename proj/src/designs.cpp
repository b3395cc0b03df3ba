#include "triphase/designs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace triphase {

namespace {

std::string id_str(UnitId id) { return std::to_string(id); }

std::string pair_str(UnitId k, UnitId p) {
    return "(" + id_str(k) + "," + id_str(p) + ")";
}

// Groups frame positions by stratum label, ascending label order.
std::map<std::string, std::vector<std::size_t>> group_by_stratum(
    const StratifiedSrsworDesign& d, const IdSet& frame) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const auto it = d.stratum_of.find(frame[i]);
        if (it == d.stratum_of.end()) {
            throw ValidationError("stratified srswor: unit " + id_str(frame[i]) +
                                  " has no stratum label");
        }
        groups[it->second].push_back(i);
    }
    return groups;
}

void validate_stratified(const StratifiedSrsworDesign& d, const IdSet& frame) {
    const auto groups = group_by_stratum(d, frame);
    for (const auto& [label, members] : groups) {
        const auto it = d.sizes.find(label);
        if (it == d.sizes.end()) {
            throw ValidationError("stratified srswor: no sample size for stratum '" + label + "'");
        }
        if (it->second == 0 || it->second > members.size()) {
            throw ValidationError("stratified srswor: stratum '" + label + "' has " +
                                  std::to_string(members.size()) + " frame units, requested n=" +
                                  std::to_string(it->second));
        }
    }
    for (const auto& [label, n] : d.sizes) {
        if (groups.find(label) == groups.end()) {
            throw ValidationError("stratified srswor: stratum '" + label +
                                  "' (n=" + std::to_string(n) + ") absent from frame");
        }
    }
}

// All k-combinations of {0,..,m-1}, lexicographic, fed to `emit`.
template <typename Fn>
void for_each_combination(std::size_t m, std::size_t k, Fn&& emit) {
    if (k > m) return;
    if (k == 0) {
        const std::vector<std::size_t> empty;
        emit(empty);
        return;
    }
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
        emit(idx);
        // advance
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (idx[i] != i + m - k) break;
            if (i == 0) return;
        }
        if (idx[i] == i + m - k) return;
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

double binomial(std::size_t m, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        c *= static_cast<double>(m - i) / static_cast<double>(i + 1);
    }
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// PhaseDesign
// ---------------------------------------------------------------------------

PhaseDesign PhaseDesign::srswor(std::size_t n) {
    if (n == 0) throw ValidationError("srswor: sample size must be positive");
    return PhaseDesign(SrsworDesign{n});
}

PhaseDesign PhaseDesign::stratified_srswor(std::map<std::string, std::size_t> sizes,
                                           std::map<UnitId, std::string> stratum_of) {
    if (sizes.empty()) throw ValidationError("stratified srswor: no stratum sizes given");
    for (const auto& [label, n] : sizes) {
        if (n == 0) {
            throw ValidationError("stratified srswor: stratum '" + label +
                                  "' sample size must be positive");
        }
    }
    return PhaseDesign(StratifiedSrsworDesign{std::move(sizes), std::move(stratum_of)});
}

PhaseDesign PhaseDesign::bernoulli(double p) { return bernoulli(p, {}); }

PhaseDesign PhaseDesign::bernoulli(double p, std::map<UnitId, double> per_unit) {
    if (!(p > 0.0) || p > 1.0) throw ValidationError("bernoulli: p must be in (0,1]");
    for (const auto& [id, pk] : per_unit) {
        if (!(pk > 0.0) || pk > 1.0) {
            throw ValidationError("bernoulli: p for unit " + id_str(id) + " must be in (0,1]");
        }
    }
    return PhaseDesign(BernoulliDesign{p, std::move(per_unit)});
}

PhaseDesign PhaseDesign::census() { return PhaseDesign(CensusDesign{}); }

PhaseDesign PhaseDesign::table(std::map<UnitId, double> first,
                               const std::vector<std::tuple<UnitId, UnitId, double>>& joint_entries) {
    if (first.empty()) throw ValidationError("table: empty first-order map");
    for (const auto& [id, pi] : first) {
        if (!(pi > 0.0) || pi > 1.0) {
            throw ValidationError("table: pi for unit " + id_str(id) + " must be in (0,1]");
        }
    }
    TableDesign t;
    t.first = std::move(first);
    for (const auto& [k, p, v] : joint_entries) {
        if (t.first.find(k) == t.first.end() || t.first.find(p) == t.first.end()) {
            throw ValidationError("table: joint entry " + pair_str(k, p) +
                                  " references a unit without a first-order entry");
        }
        if (k == p) {
            if (v != t.first.at(k)) {
                throw ValidationError("table: diagonal entry for unit " + id_str(k) +
                                      " differs from pi_k");
            }
            continue;
        }
        const double cap = std::min(t.first.at(k), t.first.at(p));
        if (!(v > 0.0)) {
            // pairwise probabilities must be positive for variance estimation
            throw ValidationError("table: joint probability for pair " + pair_str(k, p) +
                                  " must be positive");
        }
        if (v > cap) {
            throw ValidationError("table: joint probability for pair " + pair_str(k, p) +
                                  " exceeds min(pi_k, pi_p)");
        }
        const auto key = std::make_pair(std::min(k, p), std::max(k, p));
        const auto it = t.joint.find(key);
        if (it != t.joint.end() && it->second != v) {
            throw ValidationError("table: asymmetric joint entries for pair " + pair_str(k, p));
        }
        t.joint[key] = v;
    }
    return PhaseDesign(std::move(t));
}

void PhaseDesign::validate_on(const IdSet& frame) const {
    if (!is_sorted_unique(frame)) {
        throw ValidationError("frame must be sorted ascending with unique ids");
    }
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SrsworDesign>) {
                if (d.n > frame.size()) {
                    throw ValidationError("srswor: n=" + std::to_string(d.n) +
                                          " exceeds frame size " + std::to_string(frame.size()));
                }
            } else if constexpr (std::is_same_v<T, StratifiedSrsworDesign>) {
                validate_stratified(d, frame);
            } else if constexpr (std::is_same_v<T, TableDesign>) {
                for (std::size_t i = 0; i < frame.size(); ++i) {
                    if (d.first.find(frame[i]) == d.first.end()) {
                        throw ValidationError("table: no first-order entry for unit " +
                                              id_str(frame[i]));
                    }
                    for (std::size_t j = i + 1; j < frame.size(); ++j) {
                        const auto key = std::make_pair(frame[i], frame[j]);
                        if (d.joint.find(key) == d.joint.end()) {
                            throw ValidationError("table: no joint entry for pair " +
                                                  pair_str(frame[i], frame[j]));
                        }
                    }
                }
            } else {
                (void)d;  // bernoulli and census apply to any frame
            }
        },
        kind_);
}

std::string PhaseDesign::describe() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SrsworDesign>) {
                os << "srswor(n=" << d.n << ")";
            } else if constexpr (std::is_same_v<T, StratifiedSrsworDesign>) {
                os << "stratified_srswor(";
                bool sep = false;
                for (const auto& [label, n] : d.sizes) {
                    if (sep) os << ",";
                    os << label << ":" << n;
                    sep = true;
                }
                os << ")";
            } else if constexpr (std::is_same_v<T, BernoulliDesign>) {
                os << "bernoulli(p=" << d.p;
                if (!d.per_unit.empty()) os << ",overrides=" << d.per_unit.size();
                os << ")";
            } else if constexpr (std::is_same_v<T, CensusDesign>) {
                os << "census";
            } else {
                os << "table(" << d.first.size() << " units)";
            }
        },
        kind_);
    return os.str();
}

// ---------------------------------------------------------------------------
// PhaseProbabilities
// ---------------------------------------------------------------------------

PhaseProbabilities::PhaseProbabilities(IdSet frame, std::vector<double> first,
                                       std::vector<double> joint)
    : frame_(std::move(frame)), first_(std::move(first)), joint_(std::move(joint)) {
    const std::size_t m = frame_.size();
    if (!is_sorted_unique(frame_)) {
        throw ValidationError("phase probabilities: frame must be sorted ascending, unique");
    }
    if (first_.size() != m || joint_.size() != m * m) {
        throw ValidationError("phase probabilities: size mismatch");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!(first_[i] > 0.0) || first_[i] > 1.0) {
            throw ValidationError("phase probabilities: pi for unit " + id_str(frame_[i]) +
                                  " must be in (0,1]");
        }
        joint_[i * m + i] = first_[i];  // pi_kk = pi_k
        for (std::size_t j = i + 1; j < m; ++j) {
            if (joint_[i * m + j] != joint_[j * m + i]) {
                throw ValidationError("phase probabilities: joint matrix not symmetric at " +
                                      pair_str(frame_[i], frame_[j]));
            }
            if (joint_[i * m + j] < 0.0) {
                throw ValidationError("phase probabilities: negative joint probability at " +
                                      pair_str(frame_[i], frame_[j]));
            }
        }
    }
}

PhaseProbabilities PhaseProbabilities::census(const IdSet& frame) {
    const std::size_t m = frame.size();
    return PhaseProbabilities(frame, std::vector<double>(m, 1.0),
                              std::vector<double>(m * m, 1.0));
}

std::size_t PhaseProbabilities::index_of(UnitId id) const {
    const auto it = std::lower_bound(frame_.begin(), frame_.end(), id);
    if (it == frame_.end() || *it != id) {
        throw DataError("phase probabilities: unit " + id_str(id) + " not in frame");
    }
    return static_cast<std::size_t>(it - frame_.begin());
}

bool PhaseProbabilities::contains(UnitId id) const {
    return std::binary_search(frame_.begin(), frame_.end(), id);
}

double PhaseProbabilities::expected_size() const {
    NeumaierSum s;
    for (double f : first_) s.add(f);
    return s.value();
}

// ---------------------------------------------------------------------------
// SupportDistribution
// ---------------------------------------------------------------------------

double SupportDistribution::total_mass() const {
    NeumaierSum s;
    for (const auto& o : outcomes) s.add(o.probability);
    return s.value();
}

double SupportDistribution::expected_size() const {
    NeumaierSum s;
    for (const auto& o : outcomes) s.add(o.probability * static_cast<double>(o.sample.size()));
    return s.value();
}

double SupportDistribution::marginal(UnitId k) const {
    NeumaierSum s;
    for (const auto& o : outcomes) {
        if (std::binary_search(o.sample.begin(), o.sample.end(), k)) s.add(o.probability);
    }
    return s.value();
}

double SupportDistribution::marginal_pair(UnitId k, UnitId p) const {
    NeumaierSum s;
    for (const auto& o : outcomes) {
        if (std::binary_search(o.sample.begin(), o.sample.end(), k) &&
            std::binary_search(o.sample.begin(), o.sample.end(), p)) {
            s.add(o.probability);
        }
    }
    return s.value();
}

// ---------------------------------------------------------------------------
// inclusion_probabilities
// ---------------------------------------------------------------------------

namespace {

PhaseProbabilities srswor_probabilities(const SrsworDesign& d, const IdSet& frame) {
    const std::size_t m = frame.size();
    const double n = static_cast<double>(d.n);
    const double md = static_cast<double>(m);
    const double pi = n / md;
    const double pij = m >= 2 ? n * (n - 1.0) / (md * (md - 1.0)) : pi;
    std::vector<double> first(m, pi);
    std::vector<double> joint(m * m, pij);
    return PhaseProbabilities(frame, std::move(first), std::move(joint));
}

PhaseProbabilities stratified_probabilities(const StratifiedSrsworDesign& d, const IdSet& frame) {
    const std::size_t m = frame.size();
    const auto groups = group_by_stratum(d, frame);
    std::vector<double> first(m, 0.0);
    std::vector<std::size_t> stratum_index(m, 0);  // dense stratum key per position
    std::size_t next_key = 0;
    std::vector<double> same_joint;  // per stratum key
    for (const auto& [label, members] : groups) {
        const double nh = static_cast<double>(d.sizes.at(label));
        const double mh = static_cast<double>(members.size());
        const double pi = nh / mh;
        const double pij = members.size() >= 2 ? nh * (nh - 1.0) / (mh * (mh - 1.0)) : pi;
        for (std::size_t pos : members) {
            first[pos] = pi;
            stratum_index[pos] = next_key;
        }
        same_joint.push_back(pij);
        ++next_key;
    }
    std::vector<double> joint(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            // strata are sampled independently
            joint[i * m + j] = stratum_index[i] == stratum_index[j]
                                   ? same_joint[stratum_index[i]]
                                   : first[i] * first[j];
        }
    }
    return PhaseProbabilities(frame, std::move(first), std::move(joint));
}

PhaseProbabilities bernoulli_probabilities(const BernoulliDesign& d, const IdSet& frame) {
    const std::size_t m = frame.size();
    std::vector<double> first(m);
    for (std::size_t i = 0; i < m; ++i) first[i] = d.prob_of(frame[i]);
    std::vector<double> joint(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) joint[i * m + j] = first[i] * first[j];
    }
    return PhaseProbabilities(frame, std::move(first), std::move(joint));
}

PhaseProbabilities table_probabilities(const TableDesign& d, const IdSet& frame) {
    const std::size_t m = frame.size();
    std::vector<double> first(m);
    for (std::size_t i = 0; i < m; ++i) first[i] = d.first.at(frame[i]);
    std::vector<double> joint(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double v = d.joint.at(std::make_pair(frame[i], frame[j]));
            joint[i * m + j] = v;
            joint[j * m + i] = v;
        }
    }
    return PhaseProbabilities(frame, std::move(first), std::move(joint));
}

}  // namespace

PhaseProbabilities inclusion_probabilities(const PhaseDesign& design, const IdSet& frame) {
    if (frame.empty()) throw ValidationError("inclusion probabilities: empty frame");
    design.validate_on(frame);
    return std::visit(
        [&](const auto& d) -> PhaseProbabilities {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SrsworDesign>) {
                return srswor_probabilities(d, frame);
            } else if constexpr (std::is_same_v<T, StratifiedSrsworDesign>) {
                return stratified_probabilities(d, frame);
            } else if constexpr (std::is_same_v<T, BernoulliDesign>) {
                return bernoulli_probabilities(d, frame);
            } else if constexpr (std::is_same_v<T, CensusDesign>) {
                return PhaseProbabilities::census(frame);
            } else {
                return table_probabilities(d, frame);
            }
        },
        design.kind());
}

// ---------------------------------------------------------------------------
// draw
// ---------------------------------------------------------------------------

namespace {

IdSet srswor_draw(std::size_t n, const IdSet& frame, RandomStream& stream) {
    std::vector<UnitId> pool(frame.begin(), frame.end());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(stream.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    IdSet out(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

IdSet draw(const PhaseDesign& design, const IdSet& frame, RandomStream& stream) {
    design.validate_on(frame);
    return std::visit(
        [&](const auto& d) -> IdSet {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SrsworDesign>) {
                return srswor_draw(d.n, frame, stream);
            } else if constexpr (std::is_same_v<T, StratifiedSrsworDesign>) {
                const auto groups = group_by_stratum(d, frame);
                IdSet out;
                for (const auto& [label, members] : groups) {
                    IdSet stratum_frame;
                    stratum_frame.reserve(members.size());
                    for (std::size_t pos : members) stratum_frame.push_back(frame[pos]);
                    const IdSet picked = srswor_draw(d.sizes.at(label), stratum_frame, stream);
                    out.insert(out.end(), picked.begin(), picked.end());
                }
                std::sort(out.begin(), out.end());
                return out;
            } else if constexpr (std::is_same_v<T, BernoulliDesign>) {
                IdSet out;
                for (UnitId id : frame) {
                    if (stream.bernoulli(d.prob_of(id))) out.push_back(id);
                }
                return out;
            } else if constexpr (std::is_same_v<T, CensusDesign>) {
                return frame;
            } else {
                throw ValidationError(
                    "table designs carry no support distribution and cannot be drawn from");
            }
        },
        design.kind());
}

void validate_realization(const PhaseDesign& design, const IdSet& frame, const IdSet& sample) {
    design.validate_on(frame);
    if (!is_sorted_unique(sample) || !is_subset(sample, frame)) {
        throw ValidationError("realization: sample is not a subset of the frame");
    }
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SrsworDesign>) {
                if (sample.size() != d.n) {
                    throw ValidationError("realization: srswor(n=" + std::to_string(d.n) +
                                          ") cannot produce a sample of size " +
                                          std::to_string(sample.size()));
                }
            } else if constexpr (std::is_same_v<T, StratifiedSrsworDesign>) {
                std::map<std::string, std::size_t> counts;
                for (UnitId id : sample) ++counts[d.stratum_of.at(id)];
                for (const auto& [label, n] : d.sizes) {
                    const auto it = counts.find(label);
                    const std::size_t got = it == counts.end() ? 0 : it->second;
                    if (got != n) {
                        throw ValidationError("realization: stratum '" + label + "' has " +
                                              std::to_string(got) + " sampled units, design says " +
                                              std::to_string(n));
                    }
                }
            } else if constexpr (std::is_same_v<T, CensusDesign>) {
                if (sample != frame) {
                    throw ValidationError("realization: census sample must equal the frame");
                }
            } else {
                (void)d;  // bernoulli and table admit any subset
            }
        },
        design.kind());
}

// ---------------------------------------------------------------------------
// enumerate_support
// ---------------------------------------------------------------------------

SupportDistribution enumerate_support(const PhaseDesign& design, const IdSet& frame,
                                      std::size_t max_frame, std::size_t max_outcomes) {
    design.validate_on(frame);
    if (design.is_table()) {
        throw ValidationError("table designs do not support exhaustive enumeration");
    }
    if (frame.size() > max_frame) {
        throw EnumerationLimitError("enumerate_support: frame size " +
                                    std::to_string(frame.size()) + " exceeds cap " +
                                    std::to_string(max_frame) + "; use Monte Carlo instead");
    }
    const double support_size = std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SrsworDesign>) {
                return binomial(frame.size(), d.n);
            } else if constexpr (std::is_same_v<T, StratifiedSrsworDesign>) {
                double total = 1.0;
                for (const auto& [label, members] : group_by_stratum(d, frame)) {
                    total *= binomial(members.size(), d.sizes.at(label));
                }
                return total;
            } else if constexpr (std::is_same_v<T, BernoulliDesign>) {
                (void)d;
                return std::ldexp(1.0, static_cast<int>(frame.size()));
            } else {
                return 1.0;
            }
        },
        design.kind());
    if (support_size > static_cast<double>(max_outcomes)) {
        throw EnumerationLimitError("enumerate_support: support of " + design.describe() +
                                    " exceeds " + std::to_string(max_outcomes) +
                                    " outcomes; use Monte Carlo instead");
    }
    SupportDistribution dist;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SrsworDesign>) {
                const double prob = 1.0 / binomial(frame.size(), d.n);
                for_each_combination(frame.size(), d.n, [&](const std::vector<std::size_t>& idx) {
                    IdSet sample;
                    sample.reserve(idx.size());
                    for (std::size_t i : idx) sample.push_back(frame[i]);
                    dist.outcomes.push_back({std::move(sample), prob});
                });
            } else if constexpr (std::is_same_v<T, StratifiedSrsworDesign>) {
                const auto groups = group_by_stratum(d, frame);
                // per-stratum supports, then their cartesian product
                std::vector<std::vector<IdSet>> parts;
                double prob = 1.0;
                for (const auto& [label, members] : groups) {
                    const std::size_t nh = d.sizes.at(label);
                    prob /= binomial(members.size(), nh);
                    std::vector<IdSet> samples;
                    for_each_combination(members.size(), nh,
                                         [&](const std::vector<std::size_t>& idx) {
                                             IdSet s;
                                             s.reserve(idx.size());
                                             for (std::size_t i : idx)
                                                 s.push_back(frame[members[i]]);
                                             samples.push_back(std::move(s));
                                         });
                    parts.push_back(std::move(samples));
                }
                std::vector<std::size_t> pick(parts.size(), 0);
                bool done = false;
                while (!done) {
                    IdSet sample;
                    for (std::size_t g = 0; g < parts.size(); ++g) {
                        const IdSet& s = parts[g][pick[g]];
                        sample.insert(sample.end(), s.begin(), s.end());
                    }
                    std::sort(sample.begin(), sample.end());
                    dist.outcomes.push_back({std::move(sample), prob});
                    done = true;
                    for (std::size_t g = parts.size(); g-- > 0;) {
                        if (++pick[g] < parts[g].size()) {
                            done = false;
                            break;
                        }
                        pick[g] = 0;
                    }
                }
            } else if constexpr (std::is_same_v<T, BernoulliDesign>) {
                const std::size_t m = frame.size();
                std::vector<double> p(m);
                for (std::size_t i = 0; i < m; ++i) p[i] = d.prob_of(frame[i]);
                for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
                    double prob = 1.0;
                    IdSet sample;
                    for (std::size_t i = 0; i < m; ++i) {
                        if (mask & (std::uint64_t{1} << i)) {
                            prob *= p[i];
                            sample.push_back(frame[i]);
                        } else {
                            prob *= 1.0 - p[i];
                        }
                    }
                    if (prob > 0.0) dist.outcomes.push_back({std::move(sample), prob});
                }
            } else if constexpr (std::is_same_v<T, CensusDesign>) {
                dist.outcomes.push_back({frame, 1.0});
            }
        },
        design.kind());
    return dist;
}

}  // namespace triphase
