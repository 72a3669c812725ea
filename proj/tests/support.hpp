#pragma once

#include "polyexcess/aggregation.hpp"
#include "polyexcess/calendar.hpp"
#include "polyexcess/polyfit.hpp"
#include "polyexcess/registry.hpp"
#include "polyexcess/strata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace support {

using namespace polyexcess;

inline const StratumKey kTotal{SexGroup::both, AgeGroup::all};

/// Random quartic coefficients of realistic magnitude for weekly counts,
/// expressed in the raw week basis.
inline Coefficients random_quartic(std::mt19937_64& rng, int degree = 4) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // Shape in v = (w - 26.5) / 25.5, mapped to raw powers of w.
    std::array<double, 5> shape{500.0 + 400.0 * u(rng), 60.0 * u(rng), 120.0 * u(rng), 40.0 * u(rng),
                                80.0 * u(rng)};
    for (int k = degree + 1; k < 5; ++k) shape[static_cast<std::size_t>(k)] = 0.0;
    constexpr double a = 26.5, s = 25.5;
    Coefficients raw{};
    for (std::size_t j = 0; j < 5; ++j) {
        for (std::size_t k = 0; k <= j; ++k) {
            double binom = 1.0;
            for (std::size_t i = 0; i < k; ++i) binom = binom * static_cast<double>(j - i) / static_cast<double>(i + 1);
            raw[k] += shape[j] / std::pow(s, static_cast<double>(j)) * binom *
                      std::pow(-a, static_cast<double>(j - k));
        }
    }
    return raw;
}

inline std::array<double, 52> evaluate_weeks(const Coefficients& c) {
    std::array<double, 52> y{};
    for (int w = 1; w <= 52; ++w) {
        const double x = w;
        y[static_cast<std::size_t>(w - 1)] = c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x + c[4] * x * x * x * x;
    }
    return y;
}

inline AnnualWeeklySeries make_series(int year, const std::array<std::int64_t, 52>& counts,
                                      std::int64_t week53, const StratumKey& key = kTotal) {
    AnnualWeeklySeries s;
    s.year = year;
    s.stratum = key;
    s.counts = counts;
    s.week53_count = week53;
    s.leap = is_leap_year(year);
    return s;
}

/// Illness records with Poisson(rate) deaths on every day of each year,
/// placed without reference to weeks.
inline std::vector<CanonicalRecord> uniform_daily_records(YearRange years, double rate,
                                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::poisson_distribution<int> deaths(rate);
    std::vector<CanonicalRecord> out;
    for (int y : years.years()) {
        for (int d = 1; d <= days_in_year(y); ++d) {
            const int n = deaths(rng);
            for (int i = 0; i < n; ++i) {
                CanonicalRecord r;
                r.occurrence_year = y;
                r.week = std::min(53, (d + 6) / 7);
                r.sex = i % 2 ? Sex::male : Sex::female;
                r.age_years = 50;
                r.cause_class = CauseClass::illness;
                out.push_back(r);
            }
        }
    }
    return out;
}

inline double relative_error(double got, double want, double floor = 0.0) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace support
