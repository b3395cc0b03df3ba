#include "triphase/population.hpp"

#include <algorithm>

namespace triphase {

Population::Population(std::vector<Unit> units) : units_(std::move(units)) {
    std::sort(units_.begin(), units_.end(),
              [](const Unit& a, const Unit& b) { return a.id < b.id; });
    ids_.reserve(units_.size());
    for (std::size_t i = 0; i < units_.size(); ++i) {
        if (i > 0 && units_[i].id == units_[i - 1].id) {
            throw ValidationError("population: duplicate unit_id " + std::to_string(units_[i].id));
        }
        if (!std::isfinite(units_[i].y)) {
            throw ValidationError("population: non-finite y for unit_id " + std::to_string(units_[i].id));
        }
        ids_.push_back(units_[i].id);
        total_ += units_[i].y;
        if (units_[i].stratum.has_value()) has_strata_ = true;
    }
}

double Population::y_of(UnitId id) const { return units_[index_of(id)].y; }

std::size_t Population::index_of(UnitId id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) {
        throw DataError("population: unknown unit_id " + std::to_string(id));
    }
    return static_cast<std::size_t>(it - ids_.begin());
}

UnitValueMap Population::values() const {
    UnitValueMap out;
    for (const Unit& u : units_) out.emplace(u.id, u.y);
    return out;
}

std::map<UnitId, std::string> Population::strata() const {
    std::map<UnitId, std::string> out;
    for (const Unit& u : units_) {
        if (u.stratum.has_value()) out.emplace(u.id, *u.stratum);
    }
    return out;
}

}  // namespace triphase
