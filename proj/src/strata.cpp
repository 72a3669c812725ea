#include "polyexcess/strata.hpp"

#include <algorithm>
#include <stdexcept>

namespace polyexcess {

namespace {

struct Bracket {
    AgeGroup group;
    int lo;
    int hi;
    std::string_view label;
};

constexpr std::array<Bracket, 9> kBrackets{{
    {AgeGroup::y0_5, 0, 5, "0-5"},
    {AgeGroup::y6_10, 6, 10, "6-10"},
    {AgeGroup::y11_19, 11, 19, "11-19"},
    {AgeGroup::y20_29, 20, 29, "20-29"},
    {AgeGroup::y30_39, 30, 39, "30-39"},
    {AgeGroup::y40_49, 40, 49, "40-49"},
    {AgeGroup::y50_59, 50, 59, "50-59"},
    {AgeGroup::y60_69, 60, 69, "60-69"},
    {AgeGroup::y70_plus, 70, -1, "70+"},
}};

std::string trimmed(std::string_view text) {
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t");
    return std::string{text.substr(first, last - first + 1)};
}

}  // namespace

std::optional<AgeGroup> age_bracket(std::optional<int> age_years) {
    if (!age_years) {
        return std::nullopt;
    }
    if (*age_years < 0) {
        throw std::invalid_argument("negative age");
    }
    for (const auto& b : kBrackets) {
        if (*age_years >= b.lo && (b.hi < 0 || *age_years <= b.hi)) {
            return b.group;
        }
    }
    return std::nullopt;  // unreachable: brackets cover all non-negative ages
}

bool sex_matches(SexGroup group, Sex sex) noexcept {
    switch (group) {
        case SexGroup::male: return sex == Sex::male;
        case SexGroup::female: return sex == Sex::female;
        case SexGroup::both: return true;
    }
    return false;
}

bool age_matches(AgeGroup group, std::optional<int> age_years) noexcept {
    if (group == AgeGroup::all) {
        return true;
    }
    if (!age_years || *age_years < 0) {
        return false;
    }
    return age_bracket(age_years) == group;
}

bool stratum_contains(const StratumKey& key, Sex sex, std::optional<int> age_years) noexcept {
    return sex_matches(key.sex, sex) && age_matches(key.age, age_years);
}

std::vector<StratumKey> full_grid() {
    std::vector<StratumKey> grid;
    grid.reserve(kSexGroups.size() * kAgeGroups.size());
    for (auto sex : kSexGroups) {
        for (auto age : kAgeGroups) {
            grid.push_back({sex, age});
        }
    }
    return grid;
}

std::string_view to_string(Sex sex) noexcept {
    switch (sex) {
        case Sex::male: return "male";
        case Sex::female: return "female";
        case Sex::unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(SexGroup sex) noexcept {
    switch (sex) {
        case SexGroup::male: return "male";
        case SexGroup::female: return "female";
        case SexGroup::both: return "both";
    }
    return "both";
}

std::string_view to_string(AgeGroup age) noexcept {
    if (age == AgeGroup::all) {
        return "all";
    }
    for (const auto& b : kBrackets) {
        if (b.group == age) {
            return b.label;
        }
    }
    return "all";
}

std::string to_string(const StratumKey& key) {
    return std::string{to_string(key.sex)} + ":" + std::string{to_string(key.age)};
}

Sex parse_sex(std::string_view text) {
    const auto t = trimmed(text);
    if (t == "male") return Sex::male;
    if (t == "female") return Sex::female;
    if (t == "unknown") return Sex::unknown;
    throw std::invalid_argument("unknown sex label '" + t + "'");
}

SexGroup parse_sex_group(std::string_view text) {
    const auto t = trimmed(text);
    if (t == "male") return SexGroup::male;
    if (t == "female") return SexGroup::female;
    if (t == "both") return SexGroup::both;
    throw std::invalid_argument("unknown sex group '" + t + "'");
}

AgeGroup parse_age_group(std::string_view text) {
    const auto t = trimmed(text);
    if (t == "all") {
        return AgeGroup::all;
    }
    for (const auto& b : kBrackets) {
        if (b.label == t) {
            return b.group;
        }
    }
    throw std::invalid_argument("unknown age group '" + t + "'");
}

StratumKey parse_stratum(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("stratum must be 'sex:age', got '" + std::string{text} + "'");
    }
    return {parse_sex_group(text.substr(0, colon)), parse_age_group(text.substr(colon + 1))};
}

std::vector<StratumKey> parse_strata(std::string_view text) {
    if (trimmed(text) == "grid") {
        return full_grid();
    }
    std::vector<StratumKey> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string_view::npos ? text.size() - start
                                                                             : comma - start);
        if (!trimmed(item).empty()) {
            const auto key = parse_stratum(item);
            if (std::find(out.begin(), out.end(), key) == out.end()) {
                out.push_back(key);
            }
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    if (out.empty()) {
        throw std::invalid_argument("empty stratum list");
    }
    return out;
}

}  // namespace polyexcess
