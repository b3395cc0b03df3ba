#pragma once

#include <optional>
#include <string>
#include <vector>

#include "triphase/common.hpp"

namespace triphase {

struct Unit {
    UnitId id = 0;
    double y = 0.0;
    std::optional<std::string> stratum;
};

// Finite universe U: units with response values and optional stratum labels.
// Units are kept in ascending id order; the total T is the naive left-to-right
// sum of y over that order.
class Population {
public:
    explicit Population(std::vector<Unit> units);

    std::size_t size() const { return units_.size(); }
    double total() const { return total_; }
    const std::vector<Unit>& units() const { return units_; }
    const IdSet& ids() const { return ids_; }
    bool has_strata() const { return has_strata_; }

    const Unit& unit(std::size_t i) const { return units_[i]; }
    double y_of(UnitId id) const;
    std::size_t index_of(UnitId id) const;  // position in ascending order

    UnitValueMap values() const;
    std::map<UnitId, std::string> strata() const;

private:
    std::vector<Unit> units_;
    IdSet ids_;
    double total_ = 0.0;
    bool has_strata_ = false;
};

}  // namespace triphase
