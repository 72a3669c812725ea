#include "polyexcess/baseline.hpp"

#include "polyexcess/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace polyexcess {

std::string_view to_string(Parameter p) noexcept {
    switch (p) {
        case Parameter::alpha: return "alpha";
        case Parameter::beta1: return "beta1";
        case Parameter::beta2: return "beta2";
        case Parameter::beta3: return "beta3";
        case Parameter::beta4: return "beta4";
        case Parameter::sigma: return "sigma";
    }
    return "alpha";
}

Parameter parse_parameter(std::string_view text) {
    for (auto p : kParameters) {
        if (to_string(p) == text) {
            return p;
        }
    }
    throw std::invalid_argument("unknown parameter '" + std::string{text} + "'");
}

double parameter_value(const PolyFit& fit, Parameter p) noexcept {
    if (p == Parameter::sigma) {
        return fit.sigma;
    }
    return fit.coefficients[static_cast<std::size_t>(p)];
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw TrendError("line fit needs at least two paired points");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw TrendError("line fit needs at least two distinct x values");
    }
    LineFit line;
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    if (x.size() > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (my + line.slope * (x[i] - mx));
            ss += r * r;
        }
        line.residual_sd = std::sqrt(ss / (n - 2.0));
    }
    return line;
}

std::vector<double> TrendSet::extrapolation_weights(int year) const {
    const double n = static_cast<double>(reference_years.size());
    const double mean =
        std::accumulate(reference_years.begin(), reference_years.end(), 0.0) / n;
    double sxx = 0.0;
    for (int y : reference_years) {
        sxx += (y - mean) * (y - mean);
    }
    std::vector<double> w;
    w.reserve(reference_years.size());
    for (int y : reference_years) {
        w.push_back(1.0 / n + (year - mean) * (y - mean) / sxx);
    }
    return w;
}

TrendSet fit_param_trends(std::span<const PolyFit> fits) {
    if (fits.empty()) {
        throw TrendError("trend fitting needs at least 3 reference years, got 0");
    }
    std::vector<const PolyFit*> ordered;
    for (const auto& f : fits) {
        if (f.stratum != fits.front().stratum) {
            throw UsageError("trend fitting mixes strata " + to_string(f.stratum) + " and " +
                             to_string(fits.front().stratum));
        }
        ordered.push_back(&f);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const PolyFit* a, const PolyFit* b) { return a->year < b->year; });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i]->year == ordered[i - 1]->year) {
            throw UsageError("duplicate reference year " + std::to_string(ordered[i]->year));
        }
    }
    if (ordered.size() < 3) {
        throw TrendError("trend fitting needs at least 3 reference years, got " +
                         std::to_string(ordered.size()));
    }

    TrendSet set;
    set.stratum = fits.front().stratum;
    std::vector<double> years;
    for (const auto* f : ordered) {
        set.reference_years.push_back(f->year);
        years.push_back(static_cast<double>(f->year));
    }
    const YearRange span_years{set.reference_years.front(), set.reference_years.back()};

    for (auto p : kParameters) {
        std::vector<double> values;
        values.reserve(ordered.size());
        for (const auto* f : ordered) {
            values.push_back(parameter_value(*f, p));
        }
        const auto line = fit_line(years, values);
        set.trends[static_cast<std::size_t>(p)] =
            ParamTrend{p, line.slope, line.intercept, span_years, line.residual_sd};
    }
    return set;
}

double alpha_growth_rate(const ParamTrend& alpha, int year) {
    if (alpha.parameter != Parameter::alpha) {
        throw UsageError("growth rate is defined for the alpha trend");
    }
    const double level = alpha.at(year);
    if (level == 0.0) {
        throw TrendError("alpha trend is zero at " + std::to_string(year));
    }
    return 100.0 * alpha.slope / level;
}

BiasFactor bias_factor(std::span<const AnnualWeeklySeries> series, std::span<const PolyFit> fits) {
    std::map<int, const AnnualWeeklySeries*> by_year;
    for (const auto& s : series) {
        by_year[s.year] = &s;
    }
    BiasFactor result;
    double sum = 0.0;
    for (const auto& f : fits) {
        auto it = by_year.find(f.year);
        if (it == by_year.end()) {
            throw UsageError("no observed series for fitted year " + std::to_string(f.year));
        }
        const auto& s = *it->second;
        const double scaled = evaluate_quartic(f.coefficients, kPartialWeek) *
                              partial_week_days(s.leap) / 7.0;
        if (!(scaled > 0.0)) {
            result.excluded_years.push_back(f.year);
            continue;
        }
        sum += static_cast<double>(s.week53_count) / scaled;
        result.used_years.push_back(f.year);
    }
    if (result.used_years.empty()) {
        throw BiasFactorError("bias factor undefined: no year has a positive week-53 extrapolation");
    }
    result.value = sum / static_cast<double>(result.used_years.size());
    return result;
}

double BaselineForecast::expected_total() const noexcept {
    return std::accumulate(expected.begin(), expected.end(), 0.0) + expected_week53;
}

BaselineForecast forecast_year(const TrendSet& trends, double bias, int year, bool leap) {
    if (!(bias > 0.0) || !std::isfinite(bias)) {
        throw std::invalid_argument("bias factor must be positive and finite");
    }
    BaselineForecast f;
    f.year = year;
    f.stratum = trends.stratum;
    f.leap = leap;
    f.bias_factor = bias;
    for (std::size_t k = 0; k < kCoefficientCount; ++k) {
        f.coefficients[k] = trends.trends[k].at(year);
    }
    f.sigma_forecast = trends[Parameter::sigma].at(year);
    if (f.sigma_forecast < 0.0) {
        f.sigma_forecast = 0.0;
        f.sigma_clamped = true;
    }
    for (int w = 1; w <= kFullWeeks; ++w) {
        f.expected[static_cast<std::size_t>(w - 1)] = evaluate_quartic(f.coefficients, w);
    }
    f.expected_week53 =
        evaluate_quartic(f.coefficients, kPartialWeek) * partial_week_days(leap) / 7.0 * bias;
    return f;
}

BaselineForecast backtest_year(std::span<const AnnualWeeklySeries> series,
                               std::span<const PolyFit> fits, int held_out_year) {
    std::vector<PolyFit> kept;
    for (const auto& f : fits) {
        if (f.year != held_out_year) {
            kept.push_back(f);
        }
    }
    if (kept.size() == fits.size()) {
        throw UsageError("held-out year " + std::to_string(held_out_year) + " is not among the fits");
    }
    const auto trends = fit_param_trends(kept);
    const auto b = bias_factor(series, kept);
    return forecast_year(trends, b.value, held_out_year, is_leap_year(held_out_year));
}

}  // namespace polyexcess
