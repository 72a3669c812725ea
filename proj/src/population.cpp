#include "polyexcess/population.hpp"

#include "polyexcess/csv.hpp"
#include "polyexcess/errors.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyexcess {

void PopulationTable::set(int year, const StratumKey& stratum, double population) {
    if (!(population > 0.0) || !std::isfinite(population)) {
        throw std::invalid_argument("population must be positive and finite");
    }
    entries_[{year, stratum}] = population;
}

std::optional<double> PopulationTable::get(int year, const StratumKey& stratum) const {
    auto it = entries_.find({year, stratum});
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

double PopulationTable::period_denominator(YearRange period, const StratumKey& stratum) const {
    double sum = 0.0;
    for (int y : period.years()) {
        const auto p = get(y, stratum);
        if (!p) {
            throw DenominatorError("no population for " + to_string(stratum) + " in period " +
                                   period.label() + " (year " + std::to_string(y) + ")");
        }
        sum += *p;
    }
    return sum / period.size();
}

void PopulationTable::fill_aggregates() {
    std::set<int> years;
    for (const auto& [key, value] : entries_) {
        years.insert(key.first);
    }
    auto try_sum = [&](int year, const std::vector<StratumKey>& parts) -> std::optional<double> {
        double sum = 0.0;
        for (const auto& k : parts) {
            const auto v = get(year, k);
            if (!v) {
                return std::nullopt;
            }
            sum += *v;
        }
        return sum;
    };
    for (int y : years) {
        for (auto sex : {SexGroup::male, SexGroup::female}) {
            std::vector<StratumKey> parts;
            for (auto age : kAgeBrackets) {
                parts.push_back({sex, age});
            }
            if (!get(y, {sex, AgeGroup::all})) {
                if (auto s = try_sum(y, parts)) {
                    set(y, {sex, AgeGroup::all}, *s);
                }
            }
        }
        for (auto age : kAgeGroups) {
            if (!get(y, {SexGroup::both, age})) {
                if (auto s = try_sum(y, {{SexGroup::male, age}, {SexGroup::female, age}})) {
                    set(y, {SexGroup::both, age}, *s);
                }
            }
        }
        if (!get(y, {SexGroup::both, AgeGroup::all})) {
            std::vector<StratumKey> parts;
            for (auto age : kAgeBrackets) {
                parts.push_back({SexGroup::both, age});
            }
            if (auto s = try_sum(y, parts)) {
                set(y, {SexGroup::both, AgeGroup::all}, *s);
            }
        }
    }
}

PopulationTable PopulationTable::read(std::istream& in) {
    if (!in) {
        throw IngestError("unreadable population table");
    }
    csv::Reader reader{in};
    std::size_t c_year = 0, c_sex = 0, c_age = 0, c_pop = 0;
    try {
        c_year = reader.require_column("year");
        c_sex = reader.require_column("sex");
        c_age = reader.require_column("age_group");
        c_pop = reader.require_column("population");
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string{"population table: "} + e.what());
    }
    PopulationTable table;
    std::vector<std::string> f;
    while (reader.next(f)) {
        try {
            table.set(csv::parse_int(f.at(c_year)),
                      {parse_sex_group(f.at(c_sex)), parse_age_group(f.at(c_age))},
                      csv::parse_double(f.at(c_pop)));
        } catch (const std::exception& e) {
            throw IngestError("population table row " + std::to_string(reader.row_number()) +
                              ": " + e.what());
        }
    }
    return table;
}

void PopulationTable::write(std::ostream& out) const {
    out << "year,sex,age_group,population\n";
    for (const auto& [key, value] : entries_) {
        out << key.first << ',' << to_string(key.second.sex) << ',' << to_string(key.second.age)
            << ',' << csv::format_double(value) << '\n';
    }
}

}  // namespace polyexcess
