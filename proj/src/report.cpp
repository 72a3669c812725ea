#include "polyexcess/report.hpp"

#include "polyexcess/csv.hpp"
#include "polyexcess/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace polyexcess::report {

namespace {

using csv::format_double;

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

std::string join_years(const std::vector<int>& years) {
    std::string out;
    for (std::size_t i = 0; i < years.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(years[i]);
    }
    return out;
}

std::vector<std::string> stratum_fields(const StratumKey& key) {
    return {std::string(to_string(key.sex)), std::string(to_string(key.age))};
}

nlohmann::json interval_json(const Interval& i) { return {i.lo, i.hi}; }

constexpr std::array<const char*, 3> kSexColors{"#1f77b4", "#d62728", "#555555"};

}  // namespace

void write_diagnostics(std::ostream& out, std::span<const StratumResult> strata) {
    csv::write_row(out, {"year", "sex", "age_group", "alpha", "beta1", "beta2", "beta3", "beta4",
                         "sigma", "adj_r2", "ad_stat", "ad_adjusted", "ad_pvalue", "band_lo_offset",
                         "band_hi_offset", "total", "note"});
    for (const auto& sr : strata) {
        for (const auto& rec : sr.fits) {
            const auto& f = rec.fit;
            std::vector<std::string> row{std::to_string(f.year)};
            for (auto& s : stratum_fields(sr.stratum)) row.push_back(std::move(s));
            for (double c : f.coefficients) row.push_back(format_double(c));
            row.push_back(format_double(f.sigma));
            row.push_back(format_double(f.adj_r2));
            row.push_back(f.normality ? format_double(f.normality->statistic) : "");
            row.push_back(f.normality ? format_double(f.normality->adjusted_statistic) : "");
            row.push_back(f.normality ? format_double(f.normality->p_value) : "");
            row.push_back(format_double(f.band_lo_offset));
            row.push_back(format_double(f.band_hi_offset));
            row.push_back(std::to_string(rec.total));
            row.push_back(rec.note);
            csv::write_row(out, row);
        }
    }
}

void write_trends(std::ostream& out, std::span<const StratumResult> strata) {
    csv::write_row(out, {"sex", "age_group", "parameter", "slope", "intercept", "residual_sd",
                         "first_year", "last_year", "alpha_growth_pct"});
    for (const auto& sr : strata) {
        if (!sr.trends) continue;
        const auto& years = sr.trends->reference_years;
        for (const auto p : kParameters) {
            const auto& t = (*sr.trends)[p];
            std::vector<std::string> row = stratum_fields(sr.stratum);
            row.push_back(std::string(to_string(p)));
            row.push_back(format_double(t.slope));
            row.push_back(format_double(t.intercept));
            row.push_back(format_double(t.residual_sd));
            row.push_back(std::to_string(years.front()));
            row.push_back(std::to_string(years.back()));
            std::string growth;
            if (p == Parameter::alpha) {
                try {
                    growth = format_double(alpha_growth_rate(t, years.back()));
                } catch (const TrendError&) {
                }
            }
            row.push_back(growth);
            csv::write_row(out, row);
        }
    }
}

void write_bias_factors(std::ostream& out, std::span<const StratumResult> strata) {
    csv::write_row(out, {"sex", "age_group", "bias_factor", "used_years", "excluded_years"});
    for (const auto& sr : strata) {
        if (!sr.bias) continue;
        auto row = stratum_fields(sr.stratum);
        row.push_back(format_double(sr.bias->value));
        row.push_back(join_years(sr.bias->used_years));
        row.push_back(join_years(sr.bias->excluded_years));
        csv::write_row(out, row);
    }
}

void write_forecasts(std::ostream& out, std::span<const StratumResult> strata) {
    csv::write_row(out, {"year", "sex", "age_group", "alpha", "beta1", "beta2", "beta3", "beta4",
                         "sigma_forecast", "sigma_clamped", "bias_factor", "leap",
                         "expected_total", "expected_week53"});
    for (const auto& sr : strata) {
        for (const auto& f : sr.forecasts) {
            std::vector<std::string> row{std::to_string(f.year)};
            for (auto& s : stratum_fields(sr.stratum)) row.push_back(std::move(s));
            for (double c : f.coefficients) row.push_back(format_double(c));
            row.push_back(format_double(f.sigma_forecast));
            row.push_back(f.sigma_clamped ? "true" : "false");
            row.push_back(format_double(f.bias_factor));
            row.push_back(f.leap ? "true" : "false");
            row.push_back(format_double(f.expected_total()));
            row.push_back(format_double(f.expected_week53));
            csv::write_row(out, row);
        }
    }
}

void write_estimates(std::ostream& out, std::span<const EstimateRow> grid) {
    csv::write_row(out, {"period", "sex", "age_group", "psi", "psi_lo", "psi_hi", "delta_psi_pct",
                         "delta_psi_lo", "delta_psi_hi", "rate_per_100k", "rate_lo", "rate_hi",
                         "population", "expected_total", "observed_total", "level", "status"});
    for (const auto& row : grid) {
        std::vector<std::string> fields{row.period.label()};
        for (auto& s : stratum_fields(row.stratum)) fields.push_back(std::move(s));
        if (row.estimate) {
            const auto& e = *row.estimate;
            fields.push_back(format_double(e.psi));
            fields.push_back(format_double(e.psi_ci.lo));
            fields.push_back(format_double(e.psi_ci.hi));
            fields.push_back(format_double(e.delta_psi_pct));
            fields.push_back(format_double(e.delta_psi_ci.lo));
            fields.push_back(format_double(e.delta_psi_ci.hi));
            fields.push_back(opt(e.rate_per_100k));
            fields.push_back(e.rate_ci ? format_double(e.rate_ci->lo) : "");
            fields.push_back(e.rate_ci ? format_double(e.rate_ci->hi) : "");
            fields.push_back(opt(e.population));
            fields.push_back(format_double(e.expected_total));
            fields.push_back(std::to_string(e.observed_total));
            fields.push_back(format_double(e.level));
        } else {
            fields.resize(fields.size() + 13);
        }
        fields.push_back(row.status);
        csv::write_row(out, fields);
    }
}

void write_estimate_table(std::ostream& out, std::span<const EstimateRow> grid, YearRange period,
                          SexGroup sex) {
    csv::write_row(out, {"age_group", "psi", "psi_ci", "delta_psi_pct", "delta_psi_ci",
                         "rate_per_100k", "rate_ci"});
    auto interval_text = [](const Interval& i) {
        return "[" + format_double(i.lo) + ", " + format_double(i.hi) + "]";
    };
    for (const auto age : kAgeGroups) {
        const auto it = std::find_if(grid.begin(), grid.end(), [&](const EstimateRow& r) {
            return r.period.first == period.first && r.period.last == period.last &&
                   r.stratum.sex == sex && r.stratum.age == age;
        });
        if (it == grid.end()) continue;
        std::vector<std::string> fields{std::string(to_string(age))};
        if (it->estimate) {
            const auto& e = *it->estimate;
            fields.push_back(format_double(e.psi));
            fields.push_back(interval_text(e.psi_ci));
            fields.push_back(format_double(e.delta_psi_pct));
            fields.push_back(interval_text(e.delta_psi_ci));
            fields.push_back(opt(e.rate_per_100k));
            fields.push_back(e.rate_ci ? interval_text(*e.rate_ci) : "");
        } else {
            fields.resize(7);
        }
        csv::write_row(out, fields);
    }
}

nlohmann::json estimates_json(std::span<const EstimateRow> grid) {
    auto out = nlohmann::json::array();
    for (const auto& row : grid) {
        nlohmann::json j{{"period", row.period.label()},
                         {"sex", std::string(to_string(row.stratum.sex))},
                         {"age_group", std::string(to_string(row.stratum.age))},
                         {"status", row.status}};
        if (row.estimate) {
            const auto& e = *row.estimate;
            j["psi"] = e.psi;
            j["psi_ci"] = interval_json(e.psi_ci);
            j["delta_psi_pct"] = e.delta_psi_pct;
            j["delta_psi_ci"] = interval_json(e.delta_psi_ci);
            j["rate_per_100k"] = e.rate_per_100k ? nlohmann::json(*e.rate_per_100k) : nlohmann::json();
            j["rate_ci"] = e.rate_ci ? interval_json(*e.rate_ci) : nlohmann::json();
            j["population"] = e.population ? nlohmann::json(*e.population) : nlohmann::json();
            j["expected_total"] = e.expected_total;
            j["observed_total"] = e.observed_total;
            j["level"] = e.level;
        }
        out.push_back(std::move(j));
    }
    return out;
}

void write_sex_ratios(std::ostream& out, std::span<const SexRatioRow> ratios) {
    csv::write_row(out, {"period", "age_group", "male_female_rate_ratio"});
    for (const auto& r : ratios) {
        csv::write_row(out, {r.period.label(), std::string(to_string(r.age)), format_double(r.ratio)});
    }
}

void write_weekly_excess(std::ostream& out, const PipelineResult& result) {
    csv::write_row(out, {"year", "sex", "age_group", "week", "observed", "expected", "pct_excess"});
    for (const auto& sr : result.strata) {
        for (const auto& f : sr.forecasts) {
            const auto it = result.series.find(SeriesKey{f.year, sr.stratum});
            if (it == result.series.end()) continue;
            for (const auto& p : weekly_excess_curve(it->second, f)) {
                auto row = std::vector<std::string>{std::to_string(f.year)};
                for (auto& s : stratum_fields(sr.stratum)) row.push_back(std::move(s));
                row.push_back(std::to_string(p.week));
                row.push_back(format_double(p.observed));
                row.push_back(format_double(p.expected));
                row.push_back(opt(p.pct_excess));
                csv::write_row(out, row);
            }
        }
    }
}

Plot fit_plot(const AnnualWeeklySeries& series, const PolyFit& fit) {
    Plot plot{svg::LineChart(std::to_string(series.year) + " " + to_string(series.stratum) +
                                 ": weekly deaths and quartic fit",
                             "week", "deaths"),
              {"week", "observed", "fitted", "band_lo", "band_hi"},
              {}};
    const auto band = confidence_band(fit, 0.95);
    svg::Series observed{"observed", {}, {}, "#444444", 1.0, true};
    svg::Series fitted{"fitted quartic", {}, {}, "#d62728", 2.0, false};
    svg::Band region{"95% band", {}, {}, {}, "#2ca02c", 0.2};
    for (int w = 1; w <= kFullWeeks; ++w) {
        const auto i = static_cast<std::size_t>(w - 1);
        const double x = w;
        const double obs = static_cast<double>(series.counts[i]);
        observed.x.push_back(x);
        observed.y.push_back(obs);
        fitted.x.push_back(x);
        fitted.y.push_back(fit.fitted[i]);
        region.x.push_back(x);
        region.lo.push_back(band.lo[i]);
        region.hi.push_back(band.hi[i]);
        plot.rows.push_back({x, obs, fit.fitted[i], band.lo[i], band.hi[i]});
    }
    plot.chart.add_band(std::move(region));
    plot.chart.add_series(std::move(observed));
    plot.chart.add_series(std::move(fitted));
    return plot;
}

Plot trend_plot(const StratumResult& stratum, Parameter parameter) {
    const std::string name(to_string(parameter));
    Plot plot{svg::LineChart(to_string(stratum.stratum) + ": " + name + " by year", "year", name),
              {"year", "fitted_value", "trend"},
              {}};
    svg::Series points{name, {}, {}, "#1f77b4", 1.0, true};
    svg::Series line{"linear trend", {}, {}, "#d62728", 2.0, false};
    for (const auto& rec : stratum.fits) {
        const double year = rec.fit.year;
        const double v = parameter_value(rec.fit, parameter);
        const double t = stratum.trends ? (*stratum.trends)[parameter].at(rec.fit.year) : NAN;
        points.x.push_back(year);
        points.y.push_back(v);
        line.x.push_back(year);
        line.y.push_back(t);
        plot.rows.push_back({year, v, t});
    }
    for (const auto& f : stratum.forecasts) {
        line.x.push_back(f.year);
        const double t = (*stratum.trends)[parameter].at(f.year);
        line.y.push_back(t);
        plot.rows.push_back({static_cast<double>(f.year), NAN, t});
    }
    plot.chart.add_series(std::move(points));
    plot.chart.add_series(std::move(line));
    return plot;
}

Plot excess_plot(const PipelineResult& result, const StratumResult& stratum) {
    Plot plot{svg::LineChart(to_string(stratum.stratum) + ": observed and expected deaths",
                             "week since start of " + result.config.forecast_years.label(),
                             "deaths"),
              {"index", "year", "week", "observed", "expected"},
              {}};
    svg::Series observed{"observed", {}, {}, "#444444", 1.5, false};
    svg::Series expected{"expected", {}, {}, "#d62728", 2.0, false};
    double index = 0;
    for (const auto& f : stratum.forecasts) {
        const auto it = result.series.find(SeriesKey{f.year, stratum.stratum});
        if (it == result.series.end()) continue;
        for (const auto& p : weekly_excess_curve(it->second, f)) {
            index += 1;
            observed.x.push_back(index);
            observed.y.push_back(p.observed);
            expected.x.push_back(index);
            expected.y.push_back(p.expected);
            plot.rows.push_back({index, static_cast<double>(f.year), static_cast<double>(p.week),
                                 p.observed, p.expected});
        }
    }
    plot.chart.add_series(std::move(observed));
    plot.chart.add_series(std::move(expected));
    return plot;
}

Plot sex_comparison_plot(const PipelineResult& result, AgeGroup age) {
    Plot plot{svg::LineChart("Weekly excess by sex, age " + std::string(to_string(age)),
                             "week since start of " + result.config.forecast_years.label(),
                             "excess deaths (%)"),
              {"index", "year", "week", "male_pct", "female_pct"},
              {}};
    std::map<std::pair<int, int>, std::array<double, 2>> values;
    const std::array<SexGroup, 2> sexes{SexGroup::male, SexGroup::female};
    for (std::size_t s = 0; s < sexes.size(); ++s) {
        const auto found = std::find_if(result.strata.begin(), result.strata.end(),
                                        [&](const StratumResult& r) {
                                            return r.stratum.sex == sexes[s] && r.stratum.age == age;
                                        });
        if (found == result.strata.end()) continue;
        for (const auto& f : found->forecasts) {
            const auto it = result.series.find(SeriesKey{f.year, found->stratum});
            if (it == result.series.end()) continue;
            for (const auto& p : weekly_excess_curve(it->second, f)) {
                auto [slot, inserted] = values.try_emplace({f.year, p.week}, std::array<double, 2>{NAN, NAN});
                slot->second[s] = p.pct_excess.value_or(NAN);
            }
        }
    }
    svg::Series male{"men", {}, {}, kSexColors[0], 1.5, false};
    svg::Series female{"women", {}, {}, kSexColors[1], 1.5, false};
    double index = 0;
    for (const auto& [key, v] : values) {
        index += 1;
        male.x.push_back(index);
        male.y.push_back(v[0]);
        female.x.push_back(index);
        female.y.push_back(v[1]);
        plot.rows.push_back({index, static_cast<double>(key.first), static_cast<double>(key.second),
                             v[0], v[1]});
    }
    plot.chart.add_reference_line(0.0);
    plot.chart.add_series(std::move(male));
    plot.chart.add_series(std::move(female));
    return plot;
}

std::vector<std::filesystem::path> write_plot(const Plot& plot, const std::filesystem::path& dir,
                                              const std::string& stem) {
    std::filesystem::create_directories(dir);
    const auto svg_path = dir / (stem + ".svg");
    const auto csv_path = dir / (stem + ".csv");
    {
        std::ofstream out(svg_path, std::ios::binary);
        out << plot.chart.render();
        if (!out) throw Error("cannot write " + svg_path.string());
    }
    {
        std::ofstream out(csv_path, std::ios::binary);
        csv::write_row(out, plot.columns);
        for (const auto& row : plot.rows) {
            std::vector<std::string> fields;
            fields.reserve(row.size());
            for (double v : row) fields.push_back(std::isnan(v) ? "" : format_double(v));
            csv::write_row(out, fields);
        }
        if (!out) throw Error("cannot write " + csv_path.string());
    }
    return {svg_path, csv_path};
}

std::string file_label(const StratumKey& key) {
    return std::string(to_string(key.sex)) + "_" + std::string(to_string(key.age));
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 initialisation failed");
    }
    std::array<char, 1 << 16> buffer{};
    while (in) {
        in.read(buffer.data(), buffer.size());
        const auto got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(got)) != 1) {
            throw Error("SHA-256 update failed");
        }
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
        throw Error("SHA-256 finalisation failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

nlohmann::json manifest_json(const Manifest& manifest) {
    auto files = [](const std::vector<std::filesystem::path>& paths) {
        auto arr = nlohmann::json::array();
        for (const auto& p : paths) {
            arr.push_back({{"path", p.generic_string()},
                           {"bytes", std::filesystem::file_size(p)},
                           {"sha256", sha256_file(p)}});
        }
        return arr;
    };
    return {{"command", manifest.command},
            {"config", manifest.config},
            {"inputs", files(manifest.inputs)},
            {"outputs", files(manifest.outputs)},
            {"summary", manifest.summary}};
}

}  // namespace polyexcess::report
