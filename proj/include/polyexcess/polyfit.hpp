#pragma once

#include "polyexcess/aggregation.hpp"
#include "polyexcess/calendar.hpp"
#include "polyexcess/strata.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace polyexcess {

inline constexpr std::size_t kCoefficientCount = 5;

/// Number of non-intercept predictors of the quartic model.
inline constexpr int kPredictors = 4;

/// Raw-week quartic coefficients (alpha, beta1, beta2, beta3, beta4).
using Coefficients = std::array<double, kCoefficientCount>;

using WeeklyValues = std::array<double, kFullWeeks>;

[[nodiscard]] double evaluate_quartic(const Coefficients& c, double week) noexcept;

/// Rows (1, w, w^2, w^3, w^4) for each week in `weeks`.
[[nodiscard]] Eigen::MatrixXd design_matrix(std::span<const int> weeks);

enum class SigmaConvention {
    population,  ///< divide by n
    unbiased,    ///< divide by n - 5
};

[[nodiscard]] std::string_view to_string(SigmaConvention convention) noexcept;
/// Throws ConfigError for anything but "population" or "unbiased".
[[nodiscard]] SigmaConvention parse_sigma_convention(std::string_view text);

struct FitOptions {
    SigmaConvention sigma_convention = SigmaConvention::population;
    double band_level = 0.95;
};

struct AndersonDarling {
    double statistic = 0.0;           ///< A^2
    double adjusted_statistic = 0.0;  ///< A^2 (1 + 0.75/n + 2.25/n^2)
    double p_value = 1.0;
};

/// Least-squares quartic fit of one year of weekly counts.
///
/// Residuals follow the convention fitted - observed. `normality` is empty
/// when the residuals carry no spread (exact polynomial input).
struct PolyFit {
    int year = 0;
    StratumKey stratum;
    Coefficients coefficients{};
    WeeklyValues fitted{};
    WeeklyValues residuals{};
    double sigma = 0.0;
    double adj_r2 = 1.0;
    std::optional<AndersonDarling> normality;
    double band_lo_offset = 0.0;
    double band_hi_offset = 0.0;

    /// A^2 and its p-value, NaN when `normality` is empty.
    [[nodiscard]] double ad_stat() const noexcept;
    [[nodiscard]] double ad_pvalue() const noexcept;

    /// Sum of squared residuals over the residual degrees of freedom (n - 5).
    [[nodiscard]] double residual_variance() const noexcept;

    /// Observed counts recovered from fitted and residuals.
    [[nodiscard]] WeeklyValues observed() const noexcept;
};

/// Fits the quartic to 52 weekly values. Throws FitError on a wrong length or
/// non-finite input.
[[nodiscard]] PolyFit fit_quartic(std::span<const double> counts, const FitOptions& options = {});

/// fit_quartic on the full-week counts of `series`, labelled with its year and stratum.
[[nodiscard]] PolyFit ols_fit(const AnnualWeeklySeries& series, const FitOptions& options = {});

/// 1 - (1 - R^2)(n - 1)/(n - p - 1) with R^2 taken against the mean of `counts`.
/// Zero total variance yields 1 when the residuals vanish and throws
/// DegenerateSampleError otherwise.
[[nodiscard]] double adjusted_r2(std::span<const double> residuals, std::span<const double> counts,
                                 int predictors = kPredictors);

/// Anderson-Darling normality test with estimated mean and variance.
/// Requires n >= 8 (std::invalid_argument) and a positive standard deviation
/// (DegenerateSampleError).
[[nodiscard]] AndersonDarling anderson_darling(std::span<const double> sample);

/// Sample quantile by linear interpolation between order statistics,
/// position (n - 1) p. Throws std::invalid_argument for an empty sample or p outside [0, 1].
[[nodiscard]] double quantile(std::span<const double> sample, double probability);

struct ConfidenceBand {
    WeeklyValues lo{};
    WeeklyValues hi{};
};

/// Fitted curve shifted by the (1 - level)/2 and (1 + level)/2 residual quantiles.
/// Throws std::invalid_argument when level is outside (0, 1).
[[nodiscard]] ConfidenceBand confidence_band(const PolyFit& fit, double level = 0.95);

/// Weights h with sum_i h[i] d(i + 1) equal to the least-squares quartic fitted
/// to d(1..52) and evaluated at `week`. Inside 1..52 this is a row of the hat
/// matrix; at 53 it is the extrapolation used for the partial week.
[[nodiscard]] WeeklyValues hat_row(double week);

}  // namespace polyexcess
