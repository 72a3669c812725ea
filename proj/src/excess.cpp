#include "polyexcess/excess.hpp"

#include "polyexcess/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace polyexcess {

namespace {

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("confidence level must lie in (0, 1)");
    }
}

double partial_week_weight(bool leap, double bias) {
    return partial_week_days(leap) * bias / 7.0;
}

}  // namespace

YearExcess excess_year(const AnnualWeeklySeries& series, const BaselineForecast& forecast) {
    if (series.year != forecast.year || series.stratum != forecast.stratum) {
        throw UsageError("series " + to_string(series.stratum) + "/" + std::to_string(series.year) +
                         " does not match forecast " + to_string(forecast.stratum) + "/" +
                         std::to_string(forecast.year));
    }
    YearExcess out;
    out.year = series.year;
    out.stratum = series.stratum;
    out.observed_total = series_total(series);
    double psi = 0.0;
    for (std::size_t w = 0; w < series.counts.size(); ++w) {
        psi += static_cast<double>(series.counts[w]) - forecast.expected[w];
    }
    psi += static_cast<double>(series.week53_count) - forecast.expected_week53;
    out.psi = psi;
    out.expected_total = forecast.expected_total();
    return out;
}

ExcessEstimate excess_period(std::span<const YearExcess> yearly, YearRange period) {
    std::map<int, const YearExcess*> by_year;
    std::optional<StratumKey> stratum;
    for (const auto& y : yearly) {
        if (!period.contains(y.year)) {
            continue;
        }
        if (stratum && *stratum != y.stratum) {
            throw UsageError("period aggregation mixes strata");
        }
        stratum = y.stratum;
        by_year[y.year] = &y;
    }
    ExcessEstimate est;
    est.period = period;
    for (int year : period.years()) {
        auto it = by_year.find(year);
        if (it == by_year.end()) {
            throw PeriodError("period " + period.label() + " is missing year " +
                              std::to_string(year));
        }
        est.psi += it->second->psi;
        est.expected_total += it->second->expected_total;
        est.observed_total += it->second->observed_total;
    }
    est.stratum = *stratum;
    est.delta_psi_pct = 100.0 * est.psi / est.expected_total;
    est.psi_ci = {est.psi, est.psi};
    est.delta_psi_ci = {est.delta_psi_pct, est.delta_psi_pct};
    return est;
}

double observation_variance(std::span<const double> sigmas, std::span<const bool> leaps,
                            std::span<const double> biases) {
    if (sigmas.size() != leaps.size() || sigmas.size() != biases.size()) {
        throw std::invalid_argument("per-year sigma, leap and bias inputs differ in length");
    }
    double var = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (sigmas[i] < 0.0) {
            throw std::invalid_argument("negative forecast sigma");
        }
        const double c = partial_week_weight(leaps[i], biases[i]);
        var += sigmas[i] * sigmas[i] * (kFullWeeks + c * c);
    }
    return var;
}

Interval normal_interval(double psi, double variance, double level) {
    check_level(level);
    if (variance < 0.0) {
        throw std::invalid_argument("negative variance");
    }
    const boost::math::normal_distribution<double> standard;
    const double z = boost::math::quantile(standard, 0.5 + level / 2.0);
    const double half = z * std::sqrt(variance);
    return {psi - half, psi + half};
}

Interval excess_interval(double psi, std::span<const double> sigmas, std::span<const bool> leaps,
                         std::span<const double> biases, double level, double baseline_variance) {
    return normal_interval(psi, observation_variance(sigmas, leaps, biases) + baseline_variance,
                           level);
}

void attach_interval(ExcessEstimate& estimate, Interval psi_ci, double level) {
    check_level(level);
    estimate.level = level;
    estimate.psi_ci = psi_ci;
    const double scale = estimate.expected_total / 100.0;
    estimate.delta_psi_ci = {psi_ci.lo / scale, psi_ci.hi / scale};
    if (scale < 0.0) {
        std::swap(estimate.delta_psi_ci.lo, estimate.delta_psi_ci.hi);
    }
    if (estimate.population) {
        estimate.rate_ci = Interval{100000.0 * psi_ci.lo / *estimate.population,
                                    100000.0 * psi_ci.hi / *estimate.population};
    }
}

double rate_per_100k(double psi, YearRange period, const StratumKey& stratum,
                     const PopulationTable& population) {
    return 100000.0 * psi / population.period_denominator(period, stratum);
}

void attach_rate(ExcessEstimate& estimate, const PopulationTable& population) {
    const double denom = population.period_denominator(estimate.period, estimate.stratum);
    estimate.population = denom;
    estimate.rate_per_100k = 100000.0 * estimate.psi / denom;
    estimate.rate_ci = Interval{100000.0 * estimate.psi_ci.lo / denom,
                                100000.0 * estimate.psi_ci.hi / denom};
}

std::optional<double> sex_ratio(const ExcessEstimate& male, const ExcessEstimate& female) {
    if (male.period != female.period || male.stratum.age != female.stratum.age) {
        throw UsageError("sex ratio needs estimates of the same period and age group");
    }
    if (!male.rate_per_100k || !female.rate_per_100k || !(*female.rate_per_100k > 0.0)) {
        return std::nullopt;
    }
    return *male.rate_per_100k / *female.rate_per_100k;
}

std::vector<WeeklyExcessPoint> weekly_excess_curve(const AnnualWeeklySeries& series,
                                                   const BaselineForecast& forecast) {
    if (series.year != forecast.year || series.stratum != forecast.stratum) {
        throw UsageError("weekly excess curve needs a series and forecast of the same cell");
    }
    std::vector<WeeklyExcessPoint> out;
    out.reserve(kFullWeeks);
    for (int w = 1; w <= kFullWeeks; ++w) {
        const auto i = static_cast<std::size_t>(w - 1);
        WeeklyExcessPoint p;
        p.week = w;
        p.observed = static_cast<double>(series.counts[i]);
        p.expected = forecast.expected[i];
        if (p.expected > 0.0) {
            p.pct_excess = 100.0 * (p.observed - p.expected) / p.expected;
        }
        out.push_back(p);
    }
    return out;
}

double BaselineLoadings::variance() const noexcept {
    double var = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double norm2 = 0.0;
        for (double w : weights[i]) {
            norm2 += w * w;
        }
        var += variances[i] * norm2;
    }
    return var;
}

BaselineLoadings baseline_loadings(const TrendSet& trends, std::span<const PolyFit> reference_fits,
                                   std::span<const BaselineForecast> forecasts) {
    std::map<int, const PolyFit*> fit_by_year;
    for (const auto& f : reference_fits) {
        fit_by_year[f.year] = &f;
    }

    // Expected deaths of one forecast year as a functional of one year's
    // weekly counts: the fitted quartic summed over weeks 1..52 plus the
    // scaled week-53 extrapolation.
    WeeklyValues full_weeks{};
    for (int w = 1; w <= kFullWeeks; ++w) {
        const auto h = hat_row(w);
        for (std::size_t i = 0; i < h.size(); ++i) {
            full_weeks[i] += h[i];
        }
    }
    const auto week53 = hat_row(kPartialWeek);

    BaselineLoadings out;
    out.years = trends.reference_years;
    out.weights.assign(out.years.size(), WeeklyValues{});
    out.variances.reserve(out.years.size());
    for (int y : out.years) {
        auto it = fit_by_year.find(y);
        if (it == fit_by_year.end()) {
            throw UsageError("no reference fit for trend year " + std::to_string(y));
        }
        out.variances.push_back(it->second->residual_variance());
    }

    for (const auto& f : forecasts) {
        const auto lambda = trends.extrapolation_weights(f.year);
        const double c = partial_week_weight(f.leap, f.bias_factor);
        for (std::size_t y = 0; y < out.years.size(); ++y) {
            for (std::size_t i = 0; i < full_weeks.size(); ++i) {
                out.weights[y][i] += lambda[y] * (full_weeks[i] + c * week53[i]);
            }
        }
    }
    return out;
}

Interval bootstrap_interval(double psi, std::span<const PolyFit> reference_fits,
                            const BaselineLoadings& loadings,
                            std::span<const BaselineForecast> forecasts,
                            std::span<const double> sigmas, double level, std::size_t replicates,
                            std::uint64_t seed) {
    check_level(level);
    if (sigmas.size() != forecasts.size()) {
        throw std::invalid_argument("one sigma per forecast year is required");
    }
    if (replicates < 2) {
        throw std::invalid_argument("bootstrap needs at least two replicates");
    }

    // Observation noise is observed - fitted = -residual; scaling by the
    // per-year root mean square puts every year on unit variance.
    std::vector<double> pool;
    for (const auto& f : reference_fits) {
        double ss = 0.0;
        for (double r : f.residuals) {
            ss += r * r;
        }
        const double rms = std::sqrt(ss / kFullWeeks);
        if (rms > 0.0) {
            for (double r : f.residuals) {
                pool.push_back(-r / rms);
            }
        }
    }
    if (pool.empty()) {
        return {psi, psi};
    }
    const double mean = std::accumulate(pool.begin(), pool.end(), 0.0) / pool.size();
    for (auto& z : pool) {
        z -= mean;
    }

    std::mt19937_64 rng{seed};
    std::uniform_int_distribution<std::size_t> pick{0, pool.size() - 1};
    std::vector<double> errors;
    errors.reserve(replicates);
    for (std::size_t b = 0; b < replicates; ++b) {
        double noise = 0.0;
        for (std::size_t t = 0; t < forecasts.size(); ++t) {
            double sum = 0.0;
            for (int w = 0; w < kFullWeeks; ++w) {
                sum += pool[pick(rng)];
            }
            sum += partial_week_weight(forecasts[t].leap, forecasts[t].bias_factor) * pool[pick(rng)];
            noise += sigmas[t] * sum;
        }
        double baseline = 0.0;
        for (std::size_t y = 0; y < loadings.weights.size(); ++y) {
            const double sd = std::sqrt(loadings.variances[y]);
            double dot = 0.0;
            for (double w : loadings.weights[y]) {
                dot += w * pool[pick(rng)];
            }
            baseline += sd * dot;
        }
        errors.push_back(noise - baseline);
    }
    const double tail = (1.0 - level) / 2.0;
    Interval ci{psi - quantile(errors, 1.0 - tail), psi - quantile(errors, tail)};
    ci.lo = std::min(ci.lo, psi);
    ci.hi = std::max(ci.hi, psi);
    return ci;
}

std::string_view to_string(CiMethod method) noexcept {
    return method == CiMethod::normal ? "normal" : "bootstrap";
}

CiMethod parse_ci_method(std::string_view text) {
    if (text == "normal") return CiMethod::normal;
    if (text == "bootstrap") return CiMethod::bootstrap;
    throw ConfigError("unknown CI method '" + std::string{text} + "'");
}

}  // namespace polyexcess
