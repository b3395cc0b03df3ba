#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace triphase {

// Units are identified by a 64-bit integer id; all iteration over units and
// pairs is in ascending id order (the determinism contract for sums).
using UnitId = std::int64_t;

// A sample or frame: unique unit ids, sorted ascending.
using IdSet = std::vector<UnitId>;

// Per-unit response values keyed by id.
using UnitValueMap = std::map<UnitId, double>;

// Invalid or inconsistent design/frame/table input.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent data (CSV rows, config values, missing entries).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Exhaustive enumeration refused: frame or outcome count above the cap.
class EnumerationLimitError : public std::runtime_error {
public:
    explicit EnumerationLimitError(const std::string& what) : std::runtime_error(what) {}
};

// Neumaier compensated accumulator; order-insensitive to roundoff buildup.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Relative gap |lhs - rhs| / |rhs|, falling back to the absolute gap when
// rhs == 0 (so exact-zero identities report 0).
inline double relative_gap(double lhs, double rhs) {
    const double diff = std::abs(lhs - rhs);
    if (rhs == 0.0) return diff;
    return diff / std::abs(rhs);
}

inline bool is_sorted_unique(const IdSet& ids) {
    for (std::size_t i = 1; i < ids.size(); ++i) {
        if (ids[i - 1] >= ids[i]) return false;
    }
    return true;
}

// True when every id of `inner` appears in `outer`; both sorted ascending.
inline bool is_subset(const IdSet& inner, const IdSet& outer) {
    std::size_t j = 0;
    for (UnitId id : inner) {
        while (j < outer.size() && outer[j] < id) ++j;
        if (j == outer.size() || outer[j] != id) return false;
        ++j;
    }
    return true;
}

}  // namespace triphase
