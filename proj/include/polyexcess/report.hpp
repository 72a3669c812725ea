#pragma once

#include "polyexcess/pipeline.hpp"
#include "polyexcess/svg.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace polyexcess::report {

/// One row per reference fit: coefficients, sigma, adjusted R^2, normality and band offsets.
void write_diagnostics(std::ostream& out, std::span<const StratumResult> strata);

/// One row per (stratum, parameter) with the alpha growth rate at the last reference year.
void write_trends(std::ostream& out, std::span<const StratumResult> strata);

void write_bias_factors(std::ostream& out, std::span<const StratumResult> strata);

void write_forecasts(std::ostream& out, std::span<const StratumResult> strata);

/// Long table of the whole estimate grid, including cells without an estimate.
void write_estimates(std::ostream& out, std::span<const EstimateRow> grid);

/// Age rows of one period and sex group, "all" last.
void write_estimate_table(std::ostream& out, std::span<const EstimateRow> grid, YearRange period,
                          SexGroup sex);

[[nodiscard]] nlohmann::json estimates_json(std::span<const EstimateRow> grid);

void write_sex_ratios(std::ostream& out, std::span<const SexRatioRow> ratios);

/// Observed and expected deaths per forecast week, week 53 included.
void write_weekly_excess(std::ostream& out, const PipelineResult& result);

/// A chart together with the numbers it draws.
struct Plot {
    svg::LineChart chart;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

[[nodiscard]] Plot fit_plot(const AnnualWeeklySeries& series, const PolyFit& fit);
[[nodiscard]] Plot trend_plot(const StratumResult& stratum, Parameter parameter);
/// Observed against expected over the consecutive forecast weeks.
[[nodiscard]] Plot excess_plot(const PipelineResult& result, const StratumResult& stratum);
/// Weekly percentage excess of men and women for one age group.
[[nodiscard]] Plot sex_comparison_plot(const PipelineResult& result, AgeGroup age);

/// Writes `<stem>.svg` and `<stem>.csv` under `dir`; returns both paths.
std::vector<std::filesystem::path> write_plot(const Plot& plot, const std::filesystem::path& dir,
                                              const std::string& stem);

/// File-name friendly stratum label, e.g. "male_60-69".
[[nodiscard]] std::string file_label(const StratumKey& key);

/// Lower-case hex SHA-256 of a file's bytes.
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
    std::string command;
    nlohmann::json config;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    nlohmann::json summary = nlohmann::json::object();
};

/// Run description with digests of every input and output. Contains no clock
/// or host data, so identical runs give identical manifests.
[[nodiscard]] nlohmann::json manifest_json(const Manifest& manifest);

}  // namespace polyexcess::report
