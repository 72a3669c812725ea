#pragma once

#include "polyexcess/aggregation.hpp"
#include "polyexcess/baseline.hpp"
#include "polyexcess/calendar.hpp"
#include "polyexcess/polyfit.hpp"
#include "polyexcess/population.hpp"
#include "polyexcess/strata.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace polyexcess {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Observed minus expected deaths of one stratum-year.
struct YearExcess {
    int year = 0;
    StratumKey stratum;
    double psi = 0.0;
    double expected_total = 0.0;
    std::int64_t observed_total = 0;
};

/// Point and interval estimates of excess deaths for one stratum over a period.
struct ExcessEstimate {
    YearRange period;
    StratumKey stratum;
    double psi = 0.0;
    Interval psi_ci;
    double delta_psi_pct = 0.0;
    Interval delta_psi_ci;
    std::optional<double> rate_per_100k;
    std::optional<Interval> rate_ci;
    /// Mean population over the period, when a rate was attached.
    std::optional<double> population;
    double expected_total = 0.0;
    std::int64_t observed_total = 0;
    double level = 0.95;
};

/// Throws UsageError when series and forecast differ in year or stratum.
[[nodiscard]] YearExcess excess_year(const AnnualWeeklySeries& series,
                                     const BaselineForecast& forecast);

/// Sums the yearly results over `period`. Intervals are left collapsed on the
/// point estimate. Throws PeriodError when a year of the period is missing.
[[nodiscard]] ExcessEstimate excess_period(std::span<const YearExcess> yearly, YearRange period);

/// Variance of the observed-noise part of psi:
/// sum over years of sigma^2 (52 + (l b / 7)^2).
[[nodiscard]] double observation_variance(std::span<const double> sigmas,
                                          std::span<const bool> leaps,
                                          std::span<const double> biases);

/// psi +- z sqrt(variance) with z the (1 + level)/2 normal quantile.
[[nodiscard]] Interval normal_interval(double psi, double variance, double level);

/// Normal-theory interval for psi from the per-year forecast sigmas.
/// `baseline_variance` adds the uncertainty of the expected deaths themselves.
[[nodiscard]] Interval excess_interval(double psi, std::span<const double> sigmas,
                                       std::span<const bool> leaps,
                                       std::span<const double> biases, double level,
                                       double baseline_variance = 0.0);

/// Stores `psi_ci` and its scaled copies for the percentage and, when a rate
/// is present, the rate.
void attach_interval(ExcessEstimate& estimate, Interval psi_ci, double level);

/// 100,000 psi / mean population over the period.
[[nodiscard]] double rate_per_100k(double psi, YearRange period, const StratumKey& stratum,
                                   const PopulationTable& population);

/// Fills rate_per_100k and, scaled from psi_ci, rate_ci.
void attach_rate(ExcessEstimate& estimate, const PopulationTable& population);

/// Male over female excess rate; empty when either rate is missing or the
/// female rate is not positive. Throws UsageError on mismatched period or age group.
[[nodiscard]] std::optional<double> sex_ratio(const ExcessEstimate& male,
                                              const ExcessEstimate& female);

struct WeeklyExcessPoint {
    int week = 1;
    double observed = 0.0;
    double expected = 0.0;
    /// Empty when expected deaths are not positive.
    std::optional<double> pct_excess;
};

[[nodiscard]] std::vector<WeeklyExcessPoint> weekly_excess_curve(const AnnualWeeklySeries& series,
                                                                 const BaselineForecast& forecast);

/// How the reference-year data feed the expected deaths of a set of forecast years.
///
/// The expected total over the forecasts is linear in the reference counts:
/// sum_i weights[i] . d_i plus a constant, so its variance under independent
/// weekly noise is sum_i variances[i] |weights[i]|^2.
struct BaselineLoadings {
    std::vector<int> years;
    std::vector<WeeklyValues> weights;
    std::vector<double> variances;

    [[nodiscard]] double variance() const noexcept;
};

/// Loadings of the expected deaths summed over `forecasts`, all produced from
/// `trends`. Variances are the residual variances of the reference fits.
[[nodiscard]] BaselineLoadings baseline_loadings(const TrendSet& trends,
                                                 std::span<const PolyFit> reference_fits,
                                                 std::span<const BaselineForecast> forecasts);

/// Residual-resampling interval for psi. Pooled standardized residuals of the
/// reference fits drive both the observed noise of the forecast years (scaled
/// by `sigmas`) and the perturbation of the baseline through `loadings`.
[[nodiscard]] Interval bootstrap_interval(double psi, std::span<const PolyFit> reference_fits,
                                          const BaselineLoadings& loadings,
                                          std::span<const BaselineForecast> forecasts,
                                          std::span<const double> sigmas, double level,
                                          std::size_t replicates, std::uint64_t seed);

enum class CiMethod { normal, bootstrap };

[[nodiscard]] std::string_view to_string(CiMethod method) noexcept;
[[nodiscard]] CiMethod parse_ci_method(std::string_view text);

}  // namespace polyexcess
