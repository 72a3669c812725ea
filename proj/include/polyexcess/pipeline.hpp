#pragma once

#include "polyexcess/aggregation.hpp"
#include "polyexcess/baseline.hpp"
#include "polyexcess/calendar.hpp"
#include "polyexcess/excess.hpp"
#include "polyexcess/polyfit.hpp"
#include "polyexcess/population.hpp"
#include "polyexcess/registry.hpp"
#include "polyexcess/strata.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace polyexcess {

struct PipelineConfig {
    YearRange reference_years{1998, 2019};
    YearRange forecast_years{2020, 2022};
    std::vector<StratumKey> strata = full_grid();
    /// Empty means default_periods(forecast_years).
    std::vector<YearRange> periods;
    FitOptions fit;
    double ci_level = 0.95;
    CiMethod ci_method = CiMethod::normal;
    std::size_t bootstrap_replicates = 2000;
    std::uint64_t seed = 1;
    /// Worker threads for per-stratum work; 0 picks the hardware concurrency.
    unsigned threads = 0;

    /// Throws ConfigError for overlapping or misordered year ranges, periods
    /// outside the forecast years, an empty stratum list or a bad level.
    void validate() const;

    [[nodiscard]] std::vector<YearRange> effective_periods() const;

    /// Keys absent from `j` keep their defaults.
    [[nodiscard]] static PipelineConfig from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Each forecast year on its own, then every multi-year prefix starting at the
/// first forecast year (2020, 2021, 2022, 2020-2021, 2020-2022).
[[nodiscard]] std::vector<YearRange> default_periods(YearRange forecast_years);

/// Reference-year fit of one stratum. `note` is non-empty for cells that need
/// attention (no deaths at all, or residuals without spread).
struct FitRecord {
    PolyFit fit;
    std::int64_t total = 0;
    std::string note;
};

struct StratumResult {
    StratumKey stratum;
    std::vector<FitRecord> fits;
    std::optional<TrendSet> trends;
    std::optional<BiasFactor> bias;
    std::vector<BaselineForecast> forecasts;
    std::vector<YearExcess> yearly;
    std::vector<ExcessEstimate> estimates;
    /// Why the stratum stopped short of estimates, empty on success.
    std::string error;

    [[nodiscard]] std::vector<PolyFit> reference_fits() const;
};

/// One cell of the (period x stratum) estimate grid.
struct EstimateRow {
    YearRange period;
    StratumKey stratum;
    std::optional<ExcessEstimate> estimate;
    std::string status;
};

struct PipelineResult {
    PipelineConfig config;
    SeriesMap series;
    std::vector<StratumResult> strata;

    /// periods x strata rows, period-major in the configured order.
    [[nodiscard]] std::vector<EstimateRow> grid() const;
    [[nodiscard]] const StratumResult& stratum(const StratumKey& key) const;
};

enum class Stage { fit, forecast, excess };

/// Fits, trends, forecasts and estimates for one stratum, stopping after `stage`.
/// Failures of the stratum are reported through StratumResult::error.
[[nodiscard]] StratumResult run_stratum(const SeriesMap& series, const StratumKey& key,
                                        const PipelineConfig& config, Stage stage,
                                        const PopulationTable* population = nullptr);

/// Aggregates `records` and runs every configured stratum up to `stage`.
[[nodiscard]] PipelineResult run_pipeline(std::span<const CanonicalRecord> records,
                                          const PipelineConfig& config, Stage stage,
                                          const PopulationTable* population = nullptr);

/// Same as above on already aggregated series.
[[nodiscard]] PipelineResult run_pipeline(SeriesMap series, const PipelineConfig& config,
                                          Stage stage,
                                          const PopulationTable* population = nullptr);

/// Parses every file (in parallel) and merges the results in argument order.
[[nodiscard]] IngestResult ingest_files(std::span<const std::filesystem::path> paths,
                                        const IngestConfig& config);

/// Male over female ratio of excess rates per (period, age group); rows without
/// a defined ratio are omitted.
struct SexRatioRow {
    YearRange period;
    AgeGroup age = AgeGroup::all;
    double ratio = 0.0;
};

[[nodiscard]] std::vector<SexRatioRow> sex_ratios(std::span<const EstimateRow> grid);

}  // namespace polyexcess
