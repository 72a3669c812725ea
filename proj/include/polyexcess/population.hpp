#pragma once

#include "polyexcess/calendar.hpp"
#include "polyexcess/strata.hpp"

#include <istream>
#include <map>
#include <optional>
#include <ostream>

namespace polyexcess {

/// Population denominators per (year, stratum).
class PopulationTable {
public:
    /// Throws std::invalid_argument unless `population` is positive and finite.
    void set(int year, const StratumKey& stratum, double population);

    [[nodiscard]] std::optional<double> get(int year, const StratumKey& stratum) const;

    /// Mean of the yearly populations over `period`. Throws DenominatorError
    /// naming the period and stratum when any year is missing.
    [[nodiscard]] double period_denominator(YearRange period, const StratumKey& stratum) const;

    /// Derives missing `all` and `both` cells by summing their components when
    /// every component is present.
    void fill_aggregates();

    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// Delimited table with columns year,sex,age_group,population.
    [[nodiscard]] static PopulationTable read(std::istream& in);
    void write(std::ostream& out) const;

private:
    std::map<std::pair<int, StratumKey>, double> entries_;
};

}  // namespace polyexcess
