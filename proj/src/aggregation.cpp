#include "polyexcess/aggregation.hpp"

#include "polyexcess/csv.hpp"
#include "polyexcess/errors.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace polyexcess {

std::array<double, kFullWeeks> AnnualWeeklySeries::response() const {
    std::array<double, kFullWeeks> out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<double>(counts[i]);
    }
    return out;
}

SeriesMap build_series(std::span<const CanonicalRecord> records, YearRange years,
                       std::span<const StratumKey> strata) {
    SeriesMap out;
    // Direct pointers into the map keep the per-record loop free of lookups.
    std::vector<std::vector<AnnualWeeklySeries*>> cells(static_cast<std::size_t>(years.size()));
    for (int year : years.years()) {
        auto& row = cells[static_cast<std::size_t>(year - years.first)];
        for (const auto& key : strata) {
            auto [it, inserted] = out.try_emplace(SeriesKey{year, key});
            if (inserted) {
                it->second.year = year;
                it->second.stratum = key;
                it->second.leap = is_leap_year(year);
                row.push_back(&it->second);
            }
        }
    }

    for (const auto& r : records) {
        if (r.cause_class != CauseClass::illness || !years.contains(r.occurrence_year)) {
            continue;
        }
        for (auto* s : cells[static_cast<std::size_t>(r.occurrence_year - years.first)]) {
            if (!stratum_contains(s->stratum, r.sex, r.age_years)) {
                continue;
            }
            if (r.week == kPartialWeek) {
                ++s->week53_count;
            } else {
                ++s->counts[static_cast<std::size_t>(r.week - 1)];
            }
        }
    }
    return out;
}

void merge_series(SeriesMap& into, const SeriesMap& part) {
    for (const auto& [key, s] : part) {
        auto it = into.find(key);
        if (it == into.end()) {
            into.emplace(key, s);
            continue;
        }
        for (std::size_t w = 0; w < s.counts.size(); ++w) {
            it->second.counts[w] += s.counts[w];
        }
        it->second.week53_count += s.week53_count;
    }
}

std::int64_t series_total(const AnnualWeeklySeries& series) noexcept {
    return std::accumulate(series.counts.begin(), series.counts.end(), std::int64_t{0}) +
           series.week53_count;
}

std::vector<AnnualWeeklySeries> series_for(const SeriesMap& map, const StratumKey& stratum,
                                           YearRange years) {
    std::vector<AnnualWeeklySeries> out;
    out.reserve(static_cast<std::size_t>(years.size()));
    for (int y : years.years()) {
        auto it = map.find({y, stratum});
        if (it == map.end()) {
            throw std::out_of_range("no series for " + to_string(stratum) + " in " +
                                    std::to_string(y));
        }
        out.push_back(it->second);
    }
    return out;
}

void write_series_table(std::ostream& out, const SeriesMap& series) {
    out << "year,sex,age_group,week,count\n";
    for (const auto& [key, s] : series) {
        const auto sex = to_string(key.stratum.sex);
        const auto age = to_string(key.stratum.age);
        for (int w = 1; w <= kFullWeeks; ++w) {
            out << key.year << ',' << sex << ',' << age << ',' << w << ','
                << s.counts[static_cast<std::size_t>(w - 1)] << '\n';
        }
        out << key.year << ',' << sex << ',' << age << ',' << kPartialWeek << ','
            << s.week53_count << '\n';
    }
}

SeriesMap read_series_table(std::istream& in) {
    csv::Reader reader{in};
    const auto c_year = reader.require_column("year");
    const auto c_sex = reader.require_column("sex");
    const auto c_age = reader.require_column("age_group");
    const auto c_week = reader.require_column("week");
    const auto c_count = reader.require_column("count");

    SeriesMap out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        try {
            const int year = csv::parse_int(f.at(c_year));
            const StratumKey key{parse_sex_group(f.at(c_sex)), parse_age_group(f.at(c_age))};
            const int week = WeekIndex{csv::parse_int(f.at(c_week))}.value();
            const auto count = csv::parse_int64(f.at(c_count));
            if (count < 0) {
                throw std::invalid_argument("negative count");
            }
            auto [it, inserted] = out.try_emplace(SeriesKey{year, key});
            if (inserted) {
                it->second.year = year;
                it->second.stratum = key;
                it->second.leap = is_leap_year(year);
            }
            if (week == kPartialWeek) {
                it->second.week53_count = count;
            } else {
                it->second.counts[static_cast<std::size_t>(week - 1)] = count;
            }
        } catch (const std::exception& e) {
            throw IngestError("series table row " + std::to_string(reader.row_number()) + ": " +
                              e.what());
        }
    }
    return out;
}

}  // namespace polyexcess
