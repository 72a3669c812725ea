#include "polyexcess/aggregation.hpp"
#include "polyexcess/csv.hpp"
#include "polyexcess/errors.hpp"
#include "polyexcess/pipeline.hpp"
#include "polyexcess/population.hpp"
#include "polyexcess/registry.hpp"
#include "polyexcess/report.hpp"
#include "polyexcess/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace polyexcess;

namespace {

enum class PlotScope { none, summary, all };

struct Options {
    std::string config_path;
    std::vector<std::string> inputs;
    std::string out_dir;
    std::string population_path;
    std::string reference_years;
    std::string forecast_years;
    std::string strata;
    std::vector<std::string> periods;
    std::optional<double> ci_level;
    std::string ci_method;
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;
    std::string sigma_convention;
    std::optional<unsigned> threads;
    PlotScope plots = PlotScope::summary;
    bool backtest = false;
    std::string sim_years;
    double population_total = 1.0e8;
};

nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
}

PipelineConfig analysis_config(const Options& o, const nlohmann::json& cfg) {
    auto pc = PipelineConfig::from_json(cfg.value("analysis", nlohmann::json::object()));
    if (!o.reference_years.empty()) pc.reference_years = parse_year_range(o.reference_years);
    if (!o.forecast_years.empty()) pc.forecast_years = parse_year_range(o.forecast_years);
    if (!o.strata.empty()) pc.strata = parse_strata(o.strata);
    if (!o.periods.empty()) {
        pc.periods.clear();
        for (const auto& p : o.periods) pc.periods.push_back(parse_year_range(p));
    }
    if (o.ci_level) pc.ci_level = *o.ci_level;
    if (!o.ci_method.empty()) pc.ci_method = parse_ci_method(o.ci_method);
    if (o.replicates) pc.bootstrap_replicates = *o.replicates;
    if (o.seed) pc.seed = *o.seed;
    if (!o.sigma_convention.empty()) pc.fit.sigma_convention = parse_sigma_convention(o.sigma_convention);
    if (o.threads) pc.threads = *o.threads;
    pc.validate();
    return pc;
}

IngestConfig ingest_config(const nlohmann::json& cfg) {
    return IngestConfig::from_json(cfg.value("ingest", nlohmann::json::object()));
}

/// Collects the files a command writes so the manifest can list them.
class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_{std::move(root)} { fs::create_directories(root_); }

    [[nodiscard]] const fs::path& root() const { return root_; }

    template <typename Writer>
    void write(const fs::path& relative, Writer&& writer) {
        const auto path = root_ / relative;
        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        writer(out);
        out.close();
        if (!out) throw Error("cannot write " + path.string());
        files_.push_back(path);
    }

    void add_plot(const report::Plot& plot, const fs::path& relative_dir, const std::string& stem) {
        for (auto& p : report::write_plot(plot, root_ / relative_dir, stem)) files_.push_back(p);
    }

    void finish(report::Manifest manifest) {
        manifest.outputs = files_;
        const auto json = report::manifest_json(manifest);
        std::ofstream out(root_ / "manifest.json", std::ios::binary);
        out << json.dump(2) << '\n';
        if (!out) throw Error("cannot write manifest");
    }

private:
    fs::path root_;
    std::vector<fs::path> files_;
};

std::vector<fs::path> as_paths(const std::vector<std::string>& names) {
    return {names.begin(), names.end()};
}

std::vector<CanonicalRecord> load_canonical(const std::vector<fs::path>& paths) {
    std::vector<CanonicalRecord> records;
    for (const auto& p : paths) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw IngestError("cannot open canonical file " + p.string());
        auto part = read_canonical(in);
        records.insert(records.end(), part.begin(), part.end());
    }
    return records;
}

std::optional<PopulationTable> load_population(const std::string& path) {
    if (path.empty()) return std::nullopt;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open population file " + path);
    auto table = PopulationTable::read(in);
    table.fill_aggregates();
    return table;
}

bool plotted(PlotScope scope, const StratumKey& key) {
    return scope == PlotScope::all || (scope == PlotScope::summary && key.age == AgeGroup::all);
}

void report_failures(const PipelineResult& result) {
    for (const auto& sr : result.strata) {
        if (!sr.error.empty()) {
            std::cerr << "warning: stratum " << to_string(sr.stratum) << ": " << sr.error << '\n';
        }
        for (const auto& rec : sr.fits) {
            if (!rec.note.empty()) {
                std::cerr << "warning: " << to_string(sr.stratum) << " " << rec.fit.year << ": "
                          << rec.note << '\n';
            }
        }
    }
}

// ---------------------------------------------------------------------------

IngestResult do_ingest(const std::vector<fs::path>& inputs, const IngestConfig& icfg,
                       OutputDir& out) {
    auto result = ingest_files(inputs, icfg);
    const auto canonical = canonicalize(result.records, icfg.non_illness_prefixes);
    out.write("canonical.csv", [&](std::ostream& os) { write_canonical(os, canonical); });
    out.write("rejects.csv", [&](std::ostream& os) { write_reject_log(os, result.rejects); });
    if (!canonical.empty()) {
        out.write("non_illness_share.csv", [&](std::ostream& os) {
            csv::write_row(os, {"year", "non_illness_pct"});
            for (const auto& [year, pct] : non_illness_share_by_year(canonical)) {
                csv::write_row(os, {std::to_string(year), csv::format_double(pct)});
            }
        });
    }
    std::cout << "ingest: read " << result.rows_read << " rows, accepted " << result.accepted()
              << ", rejected " << result.rejected() << '\n';
    return result;
}

void do_fit(const PipelineResult& result, PlotScope plots, OutputDir& out) {
    out.write("series.csv", [&](std::ostream& os) { write_series_table(os, result.series); });
    out.write("diagnostics.csv",
              [&](std::ostream& os) { report::write_diagnostics(os, result.strata); });
    for (const auto& sr : result.strata) {
        if (!plotted(plots, sr.stratum)) continue;
        for (const auto& rec : sr.fits) {
            const auto& s = result.series.at(SeriesKey{rec.fit.year, sr.stratum});
            out.add_plot(report::fit_plot(s, rec.fit), fs::path("plots") / report::file_label(sr.stratum),
                         "fit_" + std::to_string(rec.fit.year));
        }
    }
    std::size_t fits = 0;
    for (const auto& sr : result.strata) fits += sr.fits.size();
    std::cout << "fit: " << fits << " stratum-years fitted\n";
}

void do_forecast(const PipelineResult& result, PlotScope plots, bool backtest, OutputDir& out) {
    out.write("trends.csv", [&](std::ostream& os) { report::write_trends(os, result.strata); });
    out.write("bias_factors.csv",
              [&](std::ostream& os) { report::write_bias_factors(os, result.strata); });
    out.write("forecasts.csv", [&](std::ostream& os) { report::write_forecasts(os, result.strata); });
    for (const auto& sr : result.strata) {
        if (!sr.trends || !plotted(plots, sr.stratum)) continue;
        for (const auto p : kParameters) {
            out.add_plot(report::trend_plot(sr, p), "plots",
                         "trend_" + report::file_label(sr.stratum) + "_" + std::string(to_string(p)));
        }
    }
    if (backtest) {
        out.write("backtest.csv", [&](std::ostream& os) {
            csv::write_row(os, {"year", "sex", "age_group", "observed_total", "expected_total", "psi"});
            for (const auto& sr : result.strata) {
                if (!sr.trends) continue;
                const auto series = series_for(result.series, sr.stratum, result.config.reference_years);
                const auto fits = sr.reference_fits();
                for (const auto& s : series) {
                    try {
                        const auto f = backtest_year(series, fits, s.year);
                        const auto y = excess_year(s, f);
                        csv::write_row(os, {std::to_string(s.year), std::string(to_string(sr.stratum.sex)),
                                            std::string(to_string(sr.stratum.age)),
                                            std::to_string(y.observed_total),
                                            csv::format_double(y.expected_total),
                                            csv::format_double(y.psi)});
                    } catch (const Error& e) {
                        std::cerr << "warning: backtest " << to_string(sr.stratum) << " " << s.year
                                  << ": " << e.what() << '\n';
                    }
                }
            }
        });
    }
    std::size_t n = 0;
    for (const auto& sr : result.strata) n += sr.forecasts.size();
    std::cout << "forecast: " << n << " stratum-years forecast\n";
}

void do_excess(const PipelineResult& result, PlotScope plots, OutputDir& out) {
    const auto grid = result.grid();
    out.write("estimates.csv", [&](std::ostream& os) { report::write_estimates(os, grid); });
    out.write("estimates.json",
              [&](std::ostream& os) { os << report::estimates_json(grid).dump(2) << '\n'; });
    for (const auto& period : result.config.effective_periods()) {
        for (const auto sex : kSexGroups) {
            out.write(fs::path("tables") / ("estimates_" + period.label() + "_" +
                                            std::string(to_string(sex)) + ".csv"),
                      [&](std::ostream& os) { report::write_estimate_table(os, grid, period, sex); });
        }
    }
    const auto ratios = sex_ratios(grid);
    out.write("sex_ratios.csv", [&](std::ostream& os) { report::write_sex_ratios(os, ratios); });
    out.write("weekly_excess.csv", [&](std::ostream& os) { report::write_weekly_excess(os, result); });
    if (plots != PlotScope::none) {
        for (const auto& sr : result.strata) {
            if (plotted(plots, sr.stratum) && !sr.forecasts.empty()) {
                out.add_plot(report::excess_plot(result, sr), "plots",
                             "excess_" + report::file_label(sr.stratum));
            }
        }
        for (const auto age : kAgeGroups) {
            const bool have_both =
                std::any_of(result.strata.begin(), result.strata.end(), [&](const StratumResult& r) {
                    return r.stratum.sex == SexGroup::male && r.stratum.age == age;
                }) &&
                std::any_of(result.strata.begin(), result.strata.end(), [&](const StratumResult& r) {
                    return r.stratum.sex == SexGroup::female && r.stratum.age == age;
                });
            if (have_both && (plots == PlotScope::all || age == AgeGroup::all)) {
                out.add_plot(report::sex_comparison_plot(result, age), "plots",
                             "by_sex_" + std::string(to_string(age)));
            }
        }
    }
    std::size_t ok = 0;
    for (const auto& row : grid) ok += row.estimate ? 1 : 0;
    std::cout << "excess: " << ok << " of " << grid.size() << " estimates produced\n";
    for (const auto& row : grid) {
        if (row.estimate && row.stratum.sex == SexGroup::both && row.stratum.age == AgeGroup::all) {
            const auto& e = *row.estimate;
            std::cout << "  " << row.period.label() << " all: psi " << csv::format_double(e.psi)
                      << " [" << csv::format_double(e.psi_ci.lo) << ", "
                      << csv::format_double(e.psi_ci.hi) << "], " << csv::format_double(e.delta_psi_pct)
                      << "% over expected\n";
        }
    }
}

synth::SynthConfig default_synth_config() {
    auto cfg = synth::seasonal_config(YearRange{1998, 2022}, 2010, 250.0, 0.01, 20.0, 1);
    cfg.shocks[2020] = synth::Shock{5000.0, 14, 52};
    cfg.shocks[2021] = synth::Shock{4000.0, 1, 35};
    cfg.shocks[2022] = synth::Shock{800.0, 1, 10};
    cfg.registration_lag_share = 0.026;
    cfg.non_illness_share = 0.075;
    cfg.male_share = 0.55;
    cfg.unknown_sex_share = 0.001;
    cfg.unknown_age_share = 0.005;
    return cfg;
}

int do_simulate(const Options& o) {
    const auto cfg_json = load_config(o.config_path);
    auto cfg = cfg_json.contains("synth") ? synth::SynthConfig::from_json(cfg_json.at("synth"))
                                          : default_synth_config();
    if (!o.sim_years.empty()) cfg.years = parse_year_range(o.sim_years);
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();

    OutputDir out(o.out_dir);
    const auto reg = synth::generate_registry(cfg);
    out.write("registry.csv", [&](std::ostream& os) { write_registry(os, reg.records); });
    out.write("ground_truth.json",
              [&](std::ostream& os) { os << reg.truth.to_json().dump(2) << '\n'; });
    out.write("population.csv", [&](std::ostream& os) {
        synth::synthetic_population(cfg, o.population_total).write(os);
    });
    out.write("synth_config.json", [&](std::ostream& os) { os << cfg.to_json().dump(2) << '\n'; });
    out.finish({"simulate", cfg.to_json(), {}, {}, {{"records", reg.records.size()}}});
    std::cout << "simulate: wrote " << reg.records.size() << " records for " << cfg.years.label()
              << '\n';
    return 0;
}

int run_ingest(const Options& o) {
    const auto cfg_json = load_config(o.config_path);
    const auto icfg = ingest_config(cfg_json);
    OutputDir out(o.out_dir);
    const auto inputs = as_paths(o.inputs);
    const auto result = do_ingest(inputs, icfg, out);
    out.finish({"ingest", icfg.to_json(), inputs, {},
                {{"rows_read", result.rows_read},
                 {"accepted", result.accepted()},
                 {"rejected", result.rejected()}}});
    return 0;
}

int run_analysis(const Options& o, Stage stage) {
    const auto cfg_json = load_config(o.config_path);
    const auto pc = analysis_config(o, cfg_json);
    const auto inputs = as_paths(o.inputs);
    const auto records = load_canonical(inputs);
    auto population = load_population(o.population_path.empty()
                                          ? cfg_json.value("population", std::string{})
                                          : o.population_path);
    const auto result = run_pipeline(records, pc, stage, population ? &*population : nullptr);
    report_failures(result);

    OutputDir out(o.out_dir);
    std::string command;
    switch (stage) {
        case Stage::fit:
            do_fit(result, o.plots, out);
            command = "fit";
            break;
        case Stage::forecast:
            do_forecast(result, o.plots, o.backtest, out);
            command = "forecast";
            break;
        case Stage::excess:
            do_excess(result, o.plots, out);
            command = "excess";
            break;
    }
    auto all_inputs = inputs;
    if (!o.population_path.empty()) all_inputs.emplace_back(o.population_path);
    out.finish({command, pc.to_json(), all_inputs, {}, {{"records", records.size()}}});
    return 0;
}

int run_report(const Options& o) {
    const auto cfg_json = load_config(o.config_path);
    const auto icfg = ingest_config(cfg_json);
    const auto pc = analysis_config(o, cfg_json);
    const fs::path root(o.out_dir);
    const auto inputs = as_paths(o.inputs);
    const std::string population_path =
        o.population_path.empty() ? cfg_json.value("population", std::string{}) : o.population_path;
    auto population = load_population(population_path);

    OutputDir ingest_out(root / "ingest");
    const auto ingested = do_ingest(inputs, icfg, ingest_out);
    ingest_out.finish({"ingest", icfg.to_json(), inputs, {},
                       {{"rows_read", ingested.rows_read},
                        {"accepted", ingested.accepted()},
                        {"rejected", ingested.rejected()}}});

    const auto canonical = canonicalize(ingested.records, icfg.non_illness_prefixes);
    const auto result =
        run_pipeline(canonical, pc, Stage::excess, population ? &*population : nullptr);
    report_failures(result);

    OutputDir fit_out(root / "fit");
    do_fit(result, o.plots, fit_out);
    fit_out.finish({"fit", pc.to_json(), {root / "ingest" / "canonical.csv"}, {}, {}});

    OutputDir forecast_out(root / "forecast");
    do_forecast(result, o.plots, o.backtest, forecast_out);
    forecast_out.finish({"forecast", pc.to_json(), {root / "ingest" / "canonical.csv"}, {}, {}});

    OutputDir excess_out(root / "excess");
    do_excess(result, o.plots, excess_out);
    std::vector<fs::path> excess_inputs{root / "ingest" / "canonical.csv"};
    if (!population_path.empty()) excess_inputs.emplace_back(population_path);
    excess_out.finish({"excess", pc.to_json(), excess_inputs, {}, {}});
    return 0;
}

void add_analysis_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--reference-years", o.reference_years, "Reference years, e.g. 1998:2019");
    cmd->add_option("--forecast-years", o.forecast_years, "Forecast years, e.g. 2020:2022");
    cmd->add_option("--strata", o.strata, "Comma-separated sex:age cells or 'grid'");
    cmd->add_option("--sigma-convention", o.sigma_convention, "population or unbiased")
        ->check(CLI::IsMember({"population", "unbiased"}));
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    cmd->add_option_function<std::string>(
           "--plots",
           [&o](const std::string& v) {
               o.plots = v == "none" ? PlotScope::none : v == "all" ? PlotScope::all : PlotScope::summary;
           },
           "Which strata get plots: none, summary (total and sex totals) or all")
        ->check(CLI::IsMember({"none", "summary", "all"}));
}

void add_excess_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--population", o.population_path, "Population table (year,sex,age_group,population)");
    cmd->add_option("--periods", o.periods, "Periods to report, e.g. 2020 2020:2022");
    cmd->add_option("--ci-level", o.ci_level, "Confidence level")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--ci-method", o.ci_method, "normal or bootstrap")
        ->check(CLI::IsMember({"normal", "bootstrap"}));
    cmd->add_option("--replicates", o.replicates, "Bootstrap replicates");
    cmd->add_option("--seed", o.seed, "Bootstrap seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Excess deaths from a seasonal quartic baseline"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic death registry");
    simulate->add_option("--config", o.config_path, "JSON config with a 'synth' section");
    simulate->add_option("--out", o.out_dir, "Output directory")->required();
    simulate->add_option("--seed", o.seed, "Random seed");
    simulate->add_option("--years", o.sim_years, "Generated years, e.g. 1998:2022");
    simulate->add_option("--population-total", o.population_total, "Population per year");

    auto* ingest = app.add_subcommand("ingest", "Validate registries and write canonical records");
    ingest->add_option("--config", o.config_path, "JSON config with an 'ingest' section");
    ingest->add_option("--input", o.inputs, "Registry files")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", o.out_dir, "Output directory")->required();

    auto* fit = app.add_subcommand("fit", "Fit the weekly quartic for each reference year");
    auto* forecast = app.add_subcommand("forecast", "Project expected deaths from parameter trends");
    auto* excess = app.add_subcommand("excess", "Estimate excess deaths with intervals");
    for (auto* cmd : {fit, forecast, excess}) {
        cmd->add_option("--config", o.config_path, "JSON config with an 'analysis' section");
        cmd->add_option("--input", o.inputs, "Canonical record files")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", o.out_dir, "Output directory")->required();
        add_analysis_options(cmd, o);
    }
    forecast->add_flag("--backtest", o.backtest, "Also forecast each reference year from the others");
    add_excess_options(excess, o);

    auto* rep = app.add_subcommand("report", "Run ingest, fit, forecast and excess in one go");
    rep->add_option("--config", o.config_path, "JSON config");
    rep->add_option("--input", o.inputs, "Registry files")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", o.out_dir, "Output directory")->required();
    rep->add_flag("--backtest", o.backtest, "Include leave-one-year-out forecasts");
    add_analysis_options(rep, o);
    add_excess_options(rep, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return do_simulate(o);
        if (ingest->parsed()) return run_ingest(o);
        if (fit->parsed()) return run_analysis(o, Stage::fit);
        if (forecast->parsed()) return run_analysis(o, Stage::forecast);
        if (excess->parsed()) return run_analysis(o, Stage::excess);
        if (rep->parsed()) return run_report(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
