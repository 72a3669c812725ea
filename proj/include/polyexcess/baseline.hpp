#pragma once

#include "polyexcess/aggregation.hpp"
#include "polyexcess/calendar.hpp"
#include "polyexcess/polyfit.hpp"
#include "polyexcess/strata.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace polyexcess {

enum class Parameter { alpha, beta1, beta2, beta3, beta4, sigma };

inline constexpr std::array<Parameter, 6> kParameters{Parameter::alpha, Parameter::beta1,
                                                      Parameter::beta2, Parameter::beta3,
                                                      Parameter::beta4, Parameter::sigma};

[[nodiscard]] std::string_view to_string(Parameter p) noexcept;
[[nodiscard]] Parameter parse_parameter(std::string_view text);

/// Value of `p` in a fitted year (coefficient or residual sigma).
[[nodiscard]] double parameter_value(const PolyFit& fit, Parameter p) noexcept;

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_sd = 0.0;  ///< root mean square distance to the line (n - 2 denominator)
};

/// Ordinary least-squares line through (x, y). Needs at least two distinct x.
[[nodiscard]] LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Linear trend of one model parameter over the reference years: value(t) = slope t + intercept.
struct ParamTrend {
    Parameter parameter = Parameter::alpha;
    double slope = 0.0;
    double intercept = 0.0;
    YearRange reference_years;
    double residual_sd = 0.0;

    [[nodiscard]] double at(int year) const noexcept {
        return slope * static_cast<double>(year) + intercept;
    }
};

/// The six independent parameter trends of one stratum.
struct TrendSet {
    StratumKey stratum;
    std::array<ParamTrend, 6> trends{};
    /// Years whose fits entered the regressions, ascending.
    std::vector<int> reference_years;

    [[nodiscard]] const ParamTrend& operator[](Parameter p) const noexcept {
        return trends[static_cast<std::size_t>(p)];
    }

    /// Weights w with trend.at(year) == sum_i w[i] * value(reference_years[i])
    /// for every trend in the set.
    [[nodiscard]] std::vector<double> extrapolation_weights(int year) const;
};

/// One OLS line per parameter through the per-year fits. Throws TrendError for
/// fewer than three distinct years and UsageError when strata differ.
[[nodiscard]] TrendSet fit_param_trends(std::span<const PolyFit> fits);

/// Percentage growth of the shift parameter: 100 m / (m t + c).
/// Throws TrendError when m t + c is zero.
[[nodiscard]] double alpha_growth_rate(const ParamTrend& alpha, int year);

struct BiasFactor {
    double value = 1.0;
    std::vector<int> used_years;
    /// Years dropped because the quartic extrapolated to week 53 was not positive.
    std::vector<int> excluded_years;
};

/// Mean over years of d(53) / (fitted quartic at 53 * l / 7). Series and fits
/// are matched by year. Throws BiasFactorError when every year is excluded.
[[nodiscard]] BiasFactor bias_factor(std::span<const AnnualWeeklySeries> series,
                                     std::span<const PolyFit> fits);

/// Expected deaths of one year from trend-extrapolated parameters.
struct BaselineForecast {
    int year = 0;
    StratumKey stratum;
    Coefficients coefficients{};
    double sigma_forecast = 0.0;
    /// The sigma trend went negative at this year and was clamped to zero.
    bool sigma_clamped = false;
    WeeklyValues expected{};
    double expected_week53 = 0.0;
    double bias_factor = 1.0;
    bool leap = false;

    [[nodiscard]] double expected_total() const noexcept;
};

/// Evaluates every trend at `year`. Throws std::invalid_argument for a
/// non-positive or non-finite bias factor.
[[nodiscard]] BaselineForecast forecast_year(const TrendSet& trends, double bias, int year,
                                             bool leap);

/// Forecast of `held_out_year` from trends and bias factor fitted on the other years.
[[nodiscard]] BaselineForecast backtest_year(std::span<const AnnualWeeklySeries> series,
                                             std::span<const PolyFit> fits, int held_out_year);

}  // namespace polyexcess
