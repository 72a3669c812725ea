#pragma once

#include "polyexcess/calendar.hpp"
#include "polyexcess/polyfit.hpp"
#include "polyexcess/population.hpp"
#include "polyexcess/registry.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace polyexcess::synth {

/// value(t) = slope t + intercept.
struct LinearTrend {
    double slope = 0.0;
    double intercept = 0.0;

    [[nodiscard]] double at(int year) const noexcept {
        return slope * static_cast<double>(year) + intercept;
    }

    /// Trend passing through `value` at `year`.
    [[nodiscard]] static LinearTrend through(int year, double value, double slope) noexcept {
        return {slope, value - slope * static_cast<double>(year)};
    }
};

/// Extra deaths spread evenly over weeks first_week..last_week of one year.
struct Shock {
    double mass = 0.0;
    int first_week = 1;
    int last_week = kFullWeeks;
};

struct SynthConfig {
    YearRange years{1998, 2022};
    /// alpha, beta1..beta4 and the weekly noise sigma.
    std::array<LinearTrend, 6> trends{};
    std::map<int, Shock> shocks;
    double registration_lag_share = 0.0;
    double non_illness_share = 0.0;
    double male_share = 0.5;
    double unknown_sex_share = 0.0;
    double unknown_age_share = 0.0;
    std::uint64_t seed = 1;

    [[nodiscard]] Coefficients coefficients(int year) const noexcept;
    [[nodiscard]] double sigma(int year) const noexcept { return trends[5].at(year); }

    /// Throws ConfigError for shares outside [0, 1), shocks outside the
    /// generated years or weeks, negative sigma or a negative weekly intensity.
    void validate() const;

    [[nodiscard]] static SynthConfig from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Bookkeeping of one generated year, all strata combined.
struct YearTruth {
    int year = 0;
    Coefficients coefficients{};
    double sigma = 0.0;
    std::array<std::int64_t, kFullWeeks> counts{};
    std::int64_t week53_count = 0;
    std::int64_t shock_mass = 0;
    std::int64_t illness_total = 0;
    std::int64_t non_illness_total = 0;
    std::int64_t lagged_registrations = 0;
};

struct GroundTruth {
    std::vector<YearTruth> years;

    [[nodiscard]] const YearTruth& year(int y) const;
    [[nodiscard]] nlohmann::json to_json() const;
};

struct SynthRegistry {
    std::vector<DeathRecord> records;
    GroundTruth truth;
};

/// Generates a registry whose weekly illness counts follow the configured
/// quartic with normal noise. Identical configs give identical output; each
/// year draws from its own stream derived from the seed and the year.
[[nodiscard]] SynthRegistry generate_registry(const SynthConfig& config);

/// Injected shock deaths summed over `period`.
[[nodiscard]] double ground_truth_excess(const GroundTruth& truth, YearRange period);

/// Population table matching the generator's sex and age composition, with a
/// constant `total` population every generated year.
[[nodiscard]] PopulationTable synthetic_population(const SynthConfig& config, double total);

/// A seasonal U-shaped quartic with roughly `level` deaths per week at mid-year,
/// drifting by `growth` (relative, per year) from `anchor_year`.
[[nodiscard]] SynthConfig seasonal_config(YearRange years, int anchor_year, double level,
                                          double growth, double sigma, std::uint64_t seed);

}  // namespace polyexcess::synth
