#include "polyexcess/pipeline.hpp"

#include "polyexcess/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <thread>

namespace polyexcess {

namespace {

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested == 0 ? std::thread::hardware_concurrency() : requested;
    n = std::max(1u, n);
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, jobs)));
}

/// Runs fn(i) for i in [0, n) on a small pool. Results must be written to
/// per-index slots so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
    const unsigned workers = worker_count(threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        }));
    }
    for (auto& f : pool) f.get();
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, const YearRange& period, const StratumKey& key) {
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ static_cast<std::uint64_t>(period.first));
    h = splitmix(h ^ static_cast<std::uint64_t>(period.last));
    h = splitmix(h ^ static_cast<std::uint64_t>(key.sex));
    return splitmix(h ^ static_cast<std::uint64_t>(key.age));
}

YearRange hull(YearRange a, YearRange b) {
    return YearRange{std::min(a.first, b.first), std::max(a.last, b.last)};
}

void estimate_periods(StratumResult& result, const PipelineConfig& config,
                      const PopulationTable* population) {
    const auto fits = result.reference_fits();
    // The population convention divides by 52 instead of the 47 residual
    // degrees of freedom; undo that for interval widths.
    const double df_scale = config.fit.sigma_convention == SigmaConvention::population
                                ? std::sqrt(static_cast<double>(kFullWeeks) /
                                            static_cast<double>(kFullWeeks - kCoefficientCount))
                                : 1.0;

    for (const auto& period : config.effective_periods()) {
        auto estimate = excess_period(result.yearly, period);
        estimate.level = config.ci_level;

        std::vector<BaselineForecast> forecasts;
        std::vector<double> sigmas;
        std::vector<bool> leaps;
        std::vector<double> biases;
        for (const auto& f : result.forecasts) {
            if (!period.contains(f.year)) continue;
            forecasts.push_back(f);
            sigmas.push_back(f.sigma_forecast * df_scale);
            leaps.push_back(f.leap);
            biases.push_back(f.bias_factor);
        }
        const auto loadings = baseline_loadings(*result.trends, fits, forecasts);

        Interval ci;
        if (config.ci_method == CiMethod::bootstrap) {
            ci = bootstrap_interval(estimate.psi, fits, loadings, forecasts, sigmas,
                                    config.ci_level, config.bootstrap_replicates,
                                    stream_seed(config.seed, period, result.stratum));
        } else {
            // std::vector<bool> has no contiguous storage; copy for the span.
            std::unique_ptr<bool[]> leap_flags(new bool[leaps.size()]);
            std::copy(leaps.begin(), leaps.end(), leap_flags.get());
            ci = excess_interval(estimate.psi, sigmas, {leap_flags.get(), leaps.size()}, biases,
                                 config.ci_level, loadings.variance());
        }
        attach_interval(estimate, ci, config.ci_level);

        if (population != nullptr) {
            try {
                attach_rate(estimate, *population);
            } catch (const DenominatorError&) {
                // Rate columns stay empty; the grid reports the missing denominator.
            }
        }
        result.estimates.push_back(std::move(estimate));
    }
}

}  // namespace

void PipelineConfig::validate() const {
    if (reference_years.overlaps(forecast_years)) {
        throw ConfigError("reference years " + reference_years.label() +
                          " overlap forecast years " + forecast_years.label());
    }
    if (forecast_years.first <= reference_years.last) {
        throw ConfigError("forecast years " + forecast_years.label() +
                          " must follow reference years " + reference_years.label());
    }
    if (strata.empty()) {
        throw ConfigError("no strata selected");
    }
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw ConfigError("confidence level must lie strictly between 0 and 1");
    }
    if (!(fit.band_level > 0.0 && fit.band_level < 1.0)) {
        throw ConfigError("band level must lie strictly between 0 and 1");
    }
    if (ci_method == CiMethod::bootstrap && bootstrap_replicates < 2) {
        throw ConfigError("bootstrap needs at least two replicates");
    }
    for (const auto& p : periods) {
        if (p.first < forecast_years.first || p.last > forecast_years.last) {
            throw ConfigError("period " + p.label() + " lies outside forecast years " +
                              forecast_years.label());
        }
    }
}

std::vector<YearRange> PipelineConfig::effective_periods() const {
    return periods.empty() ? default_periods(forecast_years) : periods;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    if (j.contains("reference_years")) {
        cfg.reference_years = parse_year_range(j.at("reference_years").get<std::string>());
    }
    if (j.contains("forecast_years")) {
        cfg.forecast_years = parse_year_range(j.at("forecast_years").get<std::string>());
    }
    if (j.contains("strata")) {
        const auto& s = j.at("strata");
        if (s.is_string()) {
            cfg.strata = parse_strata(s.get<std::string>());
        } else {
            cfg.strata.clear();
            for (const auto& item : s) cfg.strata.push_back(parse_stratum(item.get<std::string>()));
        }
    }
    if (j.contains("periods")) {
        cfg.periods.clear();
        for (const auto& item : j.at("periods")) {
            cfg.periods.push_back(parse_year_range(item.get<std::string>()));
        }
    }
    if (j.contains("sigma_convention")) {
        cfg.fit.sigma_convention =
            parse_sigma_convention(j.at("sigma_convention").get<std::string>());
    }
    if (j.contains("band_level")) cfg.fit.band_level = j.at("band_level").get<double>();
    if (j.contains("ci_level")) cfg.ci_level = j.at("ci_level").get<double>();
    if (j.contains("ci_method")) cfg.ci_method = parse_ci_method(j.at("ci_method").get<std::string>());
    if (j.contains("bootstrap_replicates")) {
        cfg.bootstrap_replicates = j.at("bootstrap_replicates").get<std::size_t>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    return cfg;
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json strata_json = nlohmann::json::array();
    for (const auto& s : strata) strata_json.push_back(to_string(s));
    nlohmann::json periods_json = nlohmann::json::array();
    for (const auto& p : effective_periods()) periods_json.push_back(p.label());
    return {
        {"reference_years", reference_years.label()},
        {"forecast_years", forecast_years.label()},
        {"strata", strata_json},
        {"periods", periods_json},
        {"sigma_convention", std::string(to_string(fit.sigma_convention))},
        {"band_level", fit.band_level},
        {"ci_level", ci_level},
        {"ci_method", std::string(to_string(ci_method))},
        {"bootstrap_replicates", bootstrap_replicates},
        {"seed", seed},
    };
}

std::vector<YearRange> default_periods(YearRange forecast_years) {
    std::vector<YearRange> out;
    for (int y : forecast_years.years()) out.push_back(YearRange{y, y});
    for (int last = forecast_years.first + 1; last <= forecast_years.last; ++last) {
        out.push_back(YearRange{forecast_years.first, last});
    }
    return out;
}

std::vector<PolyFit> StratumResult::reference_fits() const {
    std::vector<PolyFit> out;
    out.reserve(fits.size());
    for (const auto& f : fits) out.push_back(f.fit);
    return out;
}

std::vector<EstimateRow> PipelineResult::grid() const {
    std::vector<EstimateRow> rows;
    for (const auto& period : config.effective_periods()) {
        for (const auto& key : config.strata) {
            EstimateRow row{period, key, std::nullopt, "ok"};
            const auto& sr = stratum(key);
            const auto it = std::find_if(sr.estimates.begin(), sr.estimates.end(),
                                         [&](const ExcessEstimate& e) {
                                             return e.period.first == period.first &&
                                                    e.period.last == period.last;
                                         });
            if (it != sr.estimates.end()) {
                row.estimate = *it;
            } else {
                row.status = sr.error.empty() ? "not estimated" : sr.error;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

const StratumResult& PipelineResult::stratum(const StratumKey& key) const {
    const auto it = std::find_if(strata.begin(), strata.end(),
                                 [&](const StratumResult& r) { return r.stratum == key; });
    if (it == strata.end()) {
        throw std::out_of_range("stratum " + to_string(key) + " was not run");
    }
    return *it;
}

StratumResult run_stratum(const SeriesMap& series, const StratumKey& key,
                          const PipelineConfig& config, Stage stage,
                          const PopulationTable* population) {
    StratumResult result;
    result.stratum = key;
    try {
        const auto reference = series_for(series, key, config.reference_years);
        for (const auto& s : reference) {
            FitRecord rec{ols_fit(s, config.fit), series_total(s), {}};
            if (rec.total == 0) {
                rec.note = "no deaths";
            } else if (!rec.fit.normality) {
                rec.note = "residuals without spread";
            }
            result.fits.push_back(std::move(rec));
        }
        if (stage == Stage::fit) return result;

        const auto fits = result.reference_fits();
        result.trends = fit_param_trends(fits);
        result.bias = bias_factor(reference, fits);
        for (int y : config.forecast_years.years()) {
            auto f = forecast_year(*result.trends, result.bias->value, y, is_leap_year(y));
            result.forecasts.push_back(f);
        }
        if (stage == Stage::forecast) return result;

        const auto observed = series_for(series, key, config.forecast_years);
        for (std::size_t i = 0; i < observed.size(); ++i) {
            result.yearly.push_back(excess_year(observed[i], result.forecasts[i]));
        }
        estimate_periods(result, config, population);
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    return result;
}

PipelineResult run_pipeline(std::span<const CanonicalRecord> records, const PipelineConfig& config,
                            Stage stage, const PopulationTable* population) {
    const auto years =
        stage == Stage::excess ? hull(config.reference_years, config.forecast_years)
                               : config.reference_years;
    return run_pipeline(build_series(records, years, config.strata), config, stage, population);
}

PipelineResult run_pipeline(SeriesMap series, const PipelineConfig& config, Stage stage,
                            const PopulationTable* population) {
    config.validate();
    PipelineResult result;
    result.config = config;
    result.series = std::move(series);
    result.strata.resize(config.strata.size());
    parallel_for(config.strata.size(), config.threads, [&](std::size_t i) {
        result.strata[i] = run_stratum(result.series, config.strata[i], config, stage, population);
    });
    return result;
}

IngestResult ingest_files(std::span<const std::filesystem::path> paths, const IngestConfig& config) {
    std::vector<std::future<IngestResult>> parts;
    parts.reserve(paths.size());
    for (const auto& path : paths) {
        parts.push_back(std::async(std::launch::async, [&config, path] {
            std::ifstream in(path, std::ios::binary);
            if (!in) {
                throw IngestError("cannot open registry file " + path.string());
            }
            return parse_registry(in, config, path.string());
        }));
    }
    IngestResult merged;
    for (auto& part : parts) merged.merge(part.get());
    return merged;
}

std::vector<SexRatioRow> sex_ratios(std::span<const EstimateRow> grid) {
    std::map<std::pair<std::pair<int, int>, AgeGroup>, std::pair<const ExcessEstimate*, const ExcessEstimate*>>
        pairs;
    std::vector<std::pair<std::pair<int, int>, AgeGroup>> order;
    for (const auto& row : grid) {
        if (!row.estimate || row.stratum.sex == SexGroup::both) continue;
        const auto k = std::make_pair(std::make_pair(row.period.first, row.period.last), row.stratum.age);
        auto [it, inserted] = pairs.try_emplace(k, nullptr, nullptr);
        if (inserted) order.push_back(k);
        (row.stratum.sex == SexGroup::male ? it->second.first : it->second.second) = &*row.estimate;
    }
    std::vector<SexRatioRow> out;
    for (const auto& k : order) {
        const auto& [male, female] = pairs.at(k);
        if (male == nullptr || female == nullptr) continue;
        if (const auto r = sex_ratio(*male, *female)) {
            out.push_back(SexRatioRow{YearRange{k.first.first, k.first.second}, k.second, *r});
        }
    }
    return out;
}

}  // namespace polyexcess
