#pragma once

#include "polyexcess/calendar.hpp"
#include "polyexcess/registry.hpp"
#include "polyexcess/strata.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <vector>

namespace polyexcess {

/// Illness deaths of one stratum-year: 52 full weeks plus the partial week 53.
struct AnnualWeeklySeries {
    int year = 0;
    StratumKey stratum;
    std::array<std::int64_t, kFullWeeks> counts{};
    std::int64_t week53_count = 0;
    bool leap = false;

    /// Full-week counts as reals, the response vector of the seasonal fit.
    [[nodiscard]] std::array<double, kFullWeeks> response() const;
};

struct SeriesKey {
    int year = 0;
    StratumKey stratum;

    auto operator<=>(const SeriesKey&) const = default;
};

using SeriesMap = std::map<SeriesKey, AnnualWeeklySeries>;

/// Counts illness records into one series per (year, stratum). Every requested
/// cell is materialized, zero-filled when no record falls in it. Records outside
/// `years` and non-illness records are ignored.
[[nodiscard]] SeriesMap build_series(std::span<const CanonicalRecord> records, YearRange years,
                                     std::span<const StratumKey> strata);

/// Adds the counts of `part` into `into`. Both maps must cover the same cells.
void merge_series(SeriesMap& into, const SeriesMap& part);

[[nodiscard]] std::int64_t series_total(const AnnualWeeklySeries& series) noexcept;

/// Series of one stratum over `years`, in year order. Throws std::out_of_range
/// when a cell is missing.
[[nodiscard]] std::vector<AnnualWeeklySeries> series_for(const SeriesMap& map,
                                                         const StratumKey& stratum,
                                                         YearRange years);

/// Long-format table: year,sex,age_group,week,count (week 53 included).
void write_series_table(std::ostream& out, const SeriesMap& series);
[[nodiscard]] SeriesMap read_series_table(std::istream& in);

}  // namespace polyexcess
