#include "polyexcess/errors.hpp"
#include "polyexcess/population.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace polyexcess;

TEST_SUITE("population") {

TEST_CASE("set and get") {
    PopulationTable t;
    CHECK(t.empty());
    t.set(2020, {SexGroup::male, AgeGroup::y60_69}, 1000.0);
    CHECK(t.get(2020, {SexGroup::male, AgeGroup::y60_69}) == 1000.0);
    CHECK_FALSE(t.get(2021, {SexGroup::male, AgeGroup::y60_69}));
    CHECK_THROWS_AS(t.set(2020, {SexGroup::male, AgeGroup::all}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(t.set(2020, {SexGroup::male, AgeGroup::all}, -5.0), std::invalid_argument);
    CHECK_THROWS_AS(t.set(2020, {SexGroup::male, AgeGroup::all}, std::nan("")), std::invalid_argument);
}

TEST_CASE("period denominators average the years") {
    PopulationTable t;
    const StratumKey k{SexGroup::both, AgeGroup::all};
    t.set(2020, k, 100.0);
    t.set(2021, k, 200.0);
    t.set(2022, k, 600.0);
    CHECK(t.period_denominator({2020, 2020}, k) == 100.0);
    CHECK(t.period_denominator({2020, 2022}, k) == doctest::Approx(300.0));
    CHECK_THROWS_AS(static_cast<void>(t.period_denominator({2020, 2023}, k)), DenominatorError);
    CHECK_THROWS_WITH_AS(static_cast<void>(t.period_denominator({2020, 2020}, {SexGroup::male, AgeGroup::all})),
                         doctest::Contains("2020"), DenominatorError);
}

TEST_CASE("aggregates are filled from complete components") {
    PopulationTable t;
    double male = 0, female = 0;
    int i = 1;
    for (auto age : kAgeBrackets) {
        t.set(2020, {SexGroup::male, age}, 10.0 * i);
        t.set(2020, {SexGroup::female, age}, 11.0 * i);
        male += 10.0 * i;
        female += 11.0 * i;
        ++i;
    }
    // 2021 lacks one bracket so its totals stay missing.
    t.set(2021, {SexGroup::male, AgeGroup::y60_69}, 5.0);
    t.fill_aggregates();
    CHECK(t.get(2020, {SexGroup::male, AgeGroup::all}) == doctest::Approx(male));
    CHECK(t.get(2020, {SexGroup::female, AgeGroup::all}) == doctest::Approx(female));
    CHECK(t.get(2020, {SexGroup::both, AgeGroup::all}) == doctest::Approx(male + female));
    CHECK(t.get(2020, {SexGroup::both, AgeGroup::y60_69}) == doctest::Approx(10.0 * 8 + 11.0 * 8));
    CHECK_FALSE(t.get(2021, {SexGroup::male, AgeGroup::all}));
    CHECK_FALSE(t.get(2021, {SexGroup::both, AgeGroup::y60_69}));
}

TEST_CASE("existing aggregates are kept") {
    PopulationTable t;
    for (auto age : kAgeBrackets) t.set(2020, {SexGroup::male, age}, 1.0);
    t.set(2020, {SexGroup::male, AgeGroup::all}, 99.0);
    t.fill_aggregates();
    CHECK(t.get(2020, {SexGroup::male, AgeGroup::all}) == 99.0);
}

TEST_CASE("table round trip") {
    PopulationTable t;
    t.set(2020, {SexGroup::male, AgeGroup::y0_5}, 1234.5);
    t.set(2021, {SexGroup::both, AgeGroup::all}, 1.0e8);
    std::ostringstream out;
    t.write(out);
    std::istringstream in(out.str());
    const auto back = PopulationTable::read(in);
    CHECK(back.size() == 2);
    CHECK(back.get(2020, {SexGroup::male, AgeGroup::y0_5}) == 1234.5);
    CHECK(back.get(2021, {SexGroup::both, AgeGroup::all}) == 1.0e8);
}

TEST_CASE("malformed tables") {
    std::istringstream missing("year,sex,population\n2020,male,5\n");
    CHECK_THROWS_AS(static_cast<void>(PopulationTable::read(missing)), ConfigError);
    std::istringstream bad("year,sex,age_group,population\n2020,male,all,-1\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(PopulationTable::read(bad)), doctest::Contains("row 1"), IngestError);
}

}
