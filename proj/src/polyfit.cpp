#include "polyexcess/polyfit.hpp"

#include "polyexcess/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyexcess {

namespace {

// The solve runs on u = (w - 26.5) / 25.5, which maps weeks 1..52 onto [-1, 1].
// The raw Vandermonde columns span seven orders of magnitude.
constexpr double kCenter = 26.5;
constexpr double kScale = 25.5;

using DesignMatrix = Eigen::Matrix<double, kFullWeeks, kCoefficientCount>;
using ScaledRow = Eigen::Matrix<double, kCoefficientCount, 1>;

ScaledRow scaled_row(double week) {
    const double u = (week - kCenter) / kScale;
    ScaledRow row;
    double p = 1.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        row[j] = p;
        p *= u;
    }
    return row;
}

struct ScaledDesign {
    Eigen::HouseholderQR<DesignMatrix> qr;
    Eigen::Matrix<double, kFullWeeks, kCoefficientCount> thin_q;
    Eigen::Matrix<double, kCoefficientCount, kCoefficientCount> r;

    ScaledDesign() {
        DesignMatrix x;
        for (int w = 1; w <= kFullWeeks; ++w) {
            x.row(w - 1) = scaled_row(w).transpose();
        }
        qr.compute(x);
        thin_q = qr.householderQ() * DesignMatrix::Identity();
        r = qr.matrixQR().topRows<kCoefficientCount>().triangularView<Eigen::Upper>();
        const double rmax = r.diagonal().cwiseAbs().maxCoeff();
        if (r.diagonal().cwiseAbs().minCoeff() <= rmax * 1e-12) {
            throw FitError("quartic design matrix is numerically singular");
        }
    }
};

const ScaledDesign& scaled_design() {
    static const ScaledDesign design;
    return design;
}

// Expands sum_j g_j ((w - a)/s)^j into monomials of w.
Coefficients to_raw_basis(const ScaledRow& g) {
    constexpr std::array<std::array<long double, 5>, 5> binom{{
        {1, 0, 0, 0, 0},
        {1, 1, 0, 0, 0},
        {1, 2, 1, 0, 0},
        {1, 3, 3, 1, 0},
        {1, 4, 6, 4, 1},
    }};
    std::array<long double, kCoefficientCount> raw{};
    const long double a = kCenter;
    const long double s = kScale;
    for (std::size_t j = 0; j < kCoefficientCount; ++j) {
        const long double gj = g[static_cast<Eigen::Index>(j)] / std::pow(s, static_cast<long double>(j));
        for (std::size_t k = 0; k <= j; ++k) {
            raw[k] += gj * binom[j][k] * std::pow(-a, static_cast<long double>(j - k));
        }
    }
    Coefficients out{};
    std::transform(raw.begin(), raw.end(), out.begin(),
                   [](long double v) { return static_cast<double>(v); });
    return out;
}

long double evaluate_long(const Coefficients& c, long double w) {
    long double acc = 0.0L;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * w + *it;
    }
    return acc;
}

double population_sd(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / n);
}

}  // namespace

double evaluate_quartic(const Coefficients& c, double week) noexcept {
    return static_cast<double>(evaluate_long(c, week));
}

Eigen::MatrixXd design_matrix(std::span<const int> weeks) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(weeks.size()), kCoefficientCount);
    for (std::size_t i = 0; i < weeks.size(); ++i) {
        double p = 1.0;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kCoefficientCount); ++j) {
            x(static_cast<Eigen::Index>(i), j) = p;
            p *= weeks[i];
        }
    }
    return x;
}

double PolyFit::ad_stat() const noexcept {
    return normality ? normality->statistic : std::numeric_limits<double>::quiet_NaN();
}

double PolyFit::ad_pvalue() const noexcept {
    return normality ? normality->p_value : std::numeric_limits<double>::quiet_NaN();
}

double PolyFit::residual_variance() const noexcept {
    double ss = 0.0;
    for (double r : residuals) {
        ss += r * r;
    }
    return ss / static_cast<double>(kFullWeeks - static_cast<int>(kCoefficientCount));
}

WeeklyValues PolyFit::observed() const noexcept {
    WeeklyValues out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = fitted[i] - residuals[i];
    }
    return out;
}

std::string_view to_string(SigmaConvention convention) noexcept {
    return convention == SigmaConvention::population ? "population" : "unbiased";
}

SigmaConvention parse_sigma_convention(std::string_view text) {
    if (text == "population") return SigmaConvention::population;
    if (text == "unbiased") return SigmaConvention::unbiased;
    throw ConfigError("unknown sigma convention '" + std::string(text) + "'");
}

PolyFit fit_quartic(std::span<const double> counts, const FitOptions& options) {
    if (counts.size() != static_cast<std::size_t>(kFullWeeks)) {
        throw FitError("quartic fit needs 52 weekly values, got " + std::to_string(counts.size()));
    }
    if (!std::all_of(counts.begin(), counts.end(), [](double v) { return std::isfinite(v); })) {
        throw FitError("non-finite weekly value");
    }

    const auto& design = scaled_design();
    const Eigen::Map<const Eigen::Matrix<double, kFullWeeks, 1>> y(counts.data());
    const ScaledRow g = design.qr.solve(y);
    if (!g.allFinite()) {
        throw FitError("least-squares solve produced non-finite coefficients");
    }

    PolyFit fit;
    fit.coefficients = to_raw_basis(g);
    for (int w = 1; w <= kFullWeeks; ++w) {
        const auto i = static_cast<std::size_t>(w - 1);
        fit.fitted[i] = static_cast<double>(evaluate_long(fit.coefficients, w));
        fit.residuals[i] = fit.fitted[i] - counts[i];
    }

    const double sd = population_sd(fit.residuals);
    fit.sigma = options.sigma_convention == SigmaConvention::population
                    ? sd
                    : sd * std::sqrt(static_cast<double>(kFullWeeks) /
                                     (kFullWeeks - static_cast<int>(kCoefficientCount)));

    fit.adj_r2 = adjusted_r2(fit.residuals, counts);

    // Residual spread at the level of floating-point noise is treated as none.
    const double scale = std::max(
        1.0, std::abs(*std::max_element(counts.begin(), counts.end(),
                                        [](double a, double b) { return std::abs(a) < std::abs(b); })));
    if (sd > 1e-9 * scale) {
        fit.normality = anderson_darling(fit.residuals);
    }

    const double tail = (1.0 - options.band_level) / 2.0;
    fit.band_lo_offset = quantile(fit.residuals, tail);
    fit.band_hi_offset = quantile(fit.residuals, 1.0 - tail);
    return fit;
}

PolyFit ols_fit(const AnnualWeeklySeries& series, const FitOptions& options) {
    const auto response = series.response();
    auto fit = fit_quartic(response, options);
    fit.year = series.year;
    fit.stratum = series.stratum;
    return fit;
}

double adjusted_r2(std::span<const double> residuals, std::span<const double> counts,
                   int predictors) {
    if (residuals.size() != counts.size() || counts.empty()) {
        throw std::invalid_argument("adjusted R2 needs equally sized, non-empty inputs");
    }
    const double n = static_cast<double>(counts.size());
    if (n - predictors - 1 <= 0) {
        throw std::invalid_argument("adjusted R2 needs more observations than parameters");
    }
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / n;
    double ss_tot = 0.0;
    double ss_res = 0.0;
    double scale = 1.0;
    double max_res = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        ss_tot += (counts[i] - mean) * (counts[i] - mean);
        ss_res += residuals[i] * residuals[i];
        scale = std::max(scale, std::abs(counts[i]));
        max_res = std::max(max_res, std::abs(residuals[i]));
    }
    // Variance at rounding level counts as none.
    const double tiny = 1e-12 * scale;
    if (ss_tot <= n * tiny * tiny) {
        if (max_res <= 1e-9 * scale) {
            return 1.0;
        }
        throw DegenerateSampleError("adjusted R2 undefined: counts have zero variance");
    }
    const double r2 = 1.0 - ss_res / ss_tot;
    return 1.0 - (1.0 - r2) * (n - 1.0) / (n - predictors - 1.0);
}

double quantile(std::span<const double> sample, double probability) {
    if (sample.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    if (!(probability >= 0.0 && probability <= 1.0)) {
        throw std::invalid_argument("quantile probability outside [0, 1]");
    }
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = (static_cast<double>(sorted.size()) - 1.0) * probability;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ConfidenceBand confidence_band(const PolyFit& fit, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("confidence level must lie in (0, 1)");
    }
    const double tail = (1.0 - level) / 2.0;
    const double lo = quantile(fit.residuals, tail);
    const double hi = quantile(fit.residuals, 1.0 - tail);
    ConfidenceBand band;
    for (std::size_t i = 0; i < band.lo.size(); ++i) {
        band.lo[i] = fit.fitted[i] + lo;
        band.hi[i] = fit.fitted[i] + hi;
    }
    return band;
}

WeeklyValues hat_row(double week) {
    const auto& design = scaled_design();
    const ScaledRow x = scaled_row(week);
    const ScaledRow z = design.r.transpose().triangularView<Eigen::Lower>().solve(x);
    const Eigen::Matrix<double, kFullWeeks, 1> h = design.thin_q * z;
    WeeklyValues out{};
    std::copy(h.data(), h.data() + h.size(), out.begin());
    return out;
}

}  // namespace polyexcess
