#include "polyexcess/aggregation.hpp"
#include "polyexcess/errors.hpp"

#include "../support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace polyexcess;

namespace {

std::vector<CanonicalRecord> random_records(std::mt19937_64& rng, std::size_t n, YearRange years) {
    std::uniform_int_distribution<int> year(years.first, years.last);
    std::uniform_int_distribution<int> sex(0, 2);
    std::uniform_int_distribution<int> age(-1, 105);
    std::uniform_int_distribution<int> cause(0, 9);
    std::vector<CanonicalRecord> out(n);
    for (auto& r : out) {
        r.occurrence_year = year(rng);
        std::uniform_int_distribution<int> day(1, days_in_year(r.occurrence_year));
        r.week = std::min(53, (day(rng) + 6) / 7);
        r.sex = static_cast<Sex>(sex(rng));
        const int a = age(rng);
        r.age_years = a < 0 ? std::nullopt : std::optional<int>(a);
        r.cause_class = cause(rng) == 0 ? CauseClass::non_illness : CauseClass::illness;
    }
    return out;
}

}  // namespace

TEST_SUITE("aggregation") {

TEST_CASE("one record reaches exactly its four cells") {
    CanonicalRecord r{2021, 1, Sex::male, 67, CauseClass::illness};
    const auto grid = full_grid();
    const auto map = build_series(std::vector{r}, YearRange{2021, 2021}, grid);
    CHECK(map.size() == 30);
    int touched = 0;
    for (const auto& [key, s] : map) {
        const auto total = series_total(s);
        touched += total != 0;
        if (total) CHECK(s.counts[0] == 1);
    }
    CHECK(touched == 4);
    CHECK(map.at({2021, {SexGroup::male, AgeGroup::y60_69}}).counts[0] == 1);
    CHECK(map.at({2021, {SexGroup::both, AgeGroup::all}}).counts[0] == 1);
    CHECK(series_total(map.at({2021, {SexGroup::female, AgeGroup::all}})) == 0);
}

TEST_CASE("non-illness records are not counted") {
    CanonicalRecord r{2021, 5, Sex::female, 30, CauseClass::non_illness};
    const auto map = build_series(std::vector{r}, YearRange{2021, 2021}, std::vector{support::kTotal});
    CHECK(series_total(map.begin()->second) == 0);
}

TEST_CASE("seven deaths every day give 49 per week") {
    for (int year : {2021, 2020}) {
        std::vector<CanonicalRecord> records;
        for (int d = 1; d <= days_in_year(year); ++d) {
            for (int i = 0; i < 7; ++i) records.push_back({year, std::min(53, (d + 6) / 7), Sex::male, 50, CauseClass::illness});
        }
        const auto map = build_series(records, YearRange{year, year}, std::vector{support::kTotal});
        const auto& s = map.begin()->second;
        CHECK(std::all_of(s.counts.begin(), s.counts.end(), [](auto c) { return c == 49; }));
        CHECK(s.week53_count == (is_leap_year(year) ? 14 : 7));
        CHECK(s.leap == is_leap_year(year));
    }
}

TEST_CASE("series totals") {
    AnnualWeeklySeries s;
    CHECK(series_total(s) == 0);
    s.counts.fill(10);
    s.week53_count = 3;
    CHECK(series_total(s) == 523);
}

TEST_CASE("random registries: additivity, conservation and order independence") {
    std::mt19937_64 rng(7);
    const YearRange years{2018, 2020};
    const auto grid = full_grid();
    for (int trial = 0; trial < 20; ++trial) {
        auto records = random_records(rng, 2000, years);
        const auto map = build_series(records, years, grid);

        for (int y : years.years()) {
            for (const auto sex : kSexGroups) {
                const auto& all = map.at({y, {sex, AgeGroup::all}});
                for (int w = 0; w < 52; ++w) {
                    std::int64_t brackets = 0;
                    for (const auto g : kAgeBrackets) brackets += map.at({y, {sex, g}}).counts[static_cast<std::size_t>(w)];
                    // Unknown ages sit only in "all".
                    REQUIRE(brackets <= all.counts[static_cast<std::size_t>(w)]);
                }
            }
            for (const auto age : kAgeGroups) {
                const auto& both = map.at({y, {SexGroup::both, age}});
                const auto& m = map.at({y, {SexGroup::male, age}});
                const auto& f = map.at({y, {SexGroup::female, age}});
                for (std::size_t w = 0; w < 52; ++w) REQUIRE(m.counts[w] + f.counts[w] <= both.counts[w]);
            }
        }

        // Every illness record is counted once in (both, all).
        const auto illness = std::count_if(records.begin(), records.end(),
                                           [](const auto& r) { return r.cause_class == CauseClass::illness; });
        std::int64_t total = 0;
        for (int y : years.years()) total += series_total(map.at({y, support::kTotal}));
        CHECK(total == illness);

        // Brackets plus unknown-age records add up to "all" exactly.
        for (int y : years.years()) {
            std::int64_t unknown_age = 0;
            for (const auto& r : records) {
                unknown_age += r.cause_class == CauseClass::illness && r.occurrence_year == y && !r.age_years;
            }
            std::int64_t brackets = 0;
            for (const auto g : kAgeBrackets) brackets += series_total(map.at({y, {SexGroup::both, g}}));
            CHECK(brackets + unknown_age == series_total(map.at({y, support::kTotal})));
        }

        std::shuffle(records.begin(), records.end(), rng);
        const auto shuffled = build_series(records, years, grid);
        CHECK(shuffled.size() == map.size());
        bool same = true;
        for (const auto& [key, s] : map) {
            const auto& t = shuffled.at(key);
            same = same && s.counts == t.counts && s.week53_count == t.week53_count;
        }
        CHECK(same);

        // Partitioned counting merges to the same result.
        const std::size_t half = records.size() / 2;
        auto merged = build_series(std::span(records).first(half), years, grid);
        merge_series(merged, build_series(std::span(records).subspan(half), years, grid));
        bool merged_same = true;
        for (const auto& [key, s] : map) {
            merged_same = merged_same && merged.at(key).counts == s.counts && merged.at(key).week53_count == s.week53_count;
        }
        CHECK(merged_same);
    }
}

TEST_CASE("series lookup and table round trip") {
    std::mt19937_64 rng(11);
    const YearRange years{2019, 2020};
    const auto records = random_records(rng, 500, years);
    const auto map = build_series(records, years, full_grid());
    const auto male = series_for(map, {SexGroup::male, AgeGroup::all}, years);
    REQUIRE(male.size() == 2);
    CHECK(male[0].year == 2019);
    CHECK(male[1].leap);
    CHECK_THROWS_AS(static_cast<void>(series_for(map, support::kTotal, YearRange{2018, 2019})), std::out_of_range);

    std::stringstream io;
    write_series_table(io, map);
    const auto back = read_series_table(io);
    REQUIRE(back.size() == map.size());
    for (const auto& [key, s] : map) {
        CHECK(back.at(key).counts == s.counts);
        CHECK(back.at(key).week53_count == s.week53_count);
        CHECK(back.at(key).leap == s.leap);
    }
}

}
