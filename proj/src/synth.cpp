#include "polyexcess/synth.hpp"

#include "polyexcess/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace polyexcess::synth {

namespace {

constexpr std::array<const char*, 8> kIllnessCodes{"J189", "E119", "I219", "C349",
                                                   "K746", "N185", "I64X", "J449"};
constexpr std::array<const char*, 6> kNonIllnessCodes{"V892", "W199", "X599",
                                                      "Y870", "X954", "W780"};

// Ages are drawn as floor(100 u^kAgeShape) for uniform u.
constexpr double kAgeShape = 0.75;
constexpr int kAgeCeiling = 100;

std::mt19937_64 year_stream(std::uint64_t seed, int year) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(year)};
    return std::mt19937_64{seq};
}

int draw_age(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u{0.0, 1.0};
    return std::min(kAgeCeiling - 1,
                    static_cast<int>(std::floor(kAgeCeiling * std::pow(u(rng), kAgeShape))));
}

// P(age < a) under draw_age.
double age_cdf(double a) {
    if (a <= 0.0) return 0.0;
    if (a >= kAgeCeiling) return 1.0;
    return std::pow(a / kAgeCeiling, 1.0 / kAgeShape);
}

}  // namespace

Coefficients SynthConfig::coefficients(int year) const noexcept {
    Coefficients c{};
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = trends[k].at(year);
    }
    return c;
}

void SynthConfig::validate() const {
    auto share = [](double v, const char* name) {
        if (!(v >= 0.0 && v < 1.0)) {
            throw ConfigError(std::string{name} + " must lie in [0, 1)");
        }
    };
    share(registration_lag_share, "registration_lag_share");
    share(non_illness_share, "non_illness_share");
    share(unknown_sex_share, "unknown_sex_share");
    share(unknown_age_share, "unknown_age_share");
    if (!(male_share >= 0.0 && male_share <= 1.0)) {
        throw ConfigError("male_share must lie in [0, 1]");
    }
    for (const auto& [year, shock] : shocks) {
        if (!years.contains(year)) {
            throw ConfigError("shock year " + std::to_string(year) + " outside generated years");
        }
        if (shock.first_week < 1 || shock.last_week > kFullWeeks ||
            shock.first_week > shock.last_week) {
            throw ConfigError("shock weeks must satisfy 1 <= first <= last <= 52");
        }
        if (shock.mass < 0.0) {
            throw ConfigError("shock mass must be non-negative");
        }
    }
    for (int y : years.years()) {
        if (sigma(y) < 0.0) {
            throw ConfigError("negative noise sigma in " + std::to_string(y));
        }
        const auto c = coefficients(y);
        for (int w = 1; w <= kPartialWeek; ++w) {
            if (evaluate_quartic(c, w) < 0.0) {
                throw ConfigError("negative weekly intensity in " + std::to_string(y) + " week " +
                                  std::to_string(w));
            }
        }
    }
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
    SynthConfig cfg;
    if (j.contains("years")) {
        cfg.years = parse_year_range(j.at("years").get<std::string>());
    }
    if (j.contains("trends")) {
        const auto& t = j.at("trends");
        const std::array<const char*, 6> names{"alpha", "beta1", "beta2", "beta3", "beta4", "sigma"};
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (t.contains(names[k])) {
                cfg.trends[k] = {t.at(names[k]).at("slope").get<double>(),
                                 t.at(names[k]).at("intercept").get<double>()};
            }
        }
    }
    if (j.contains("shocks")) {
        for (const auto& [year, s] : j.at("shocks").items()) {
            cfg.shocks[std::stoi(year)] = {s.at("mass").get<double>(),
                                           s.value("first_week", 1),
                                           s.value("last_week", kFullWeeks)};
        }
    }
    cfg.registration_lag_share = j.value("registration_lag_share", cfg.registration_lag_share);
    cfg.non_illness_share = j.value("non_illness_share", cfg.non_illness_share);
    cfg.male_share = j.value("male_share", cfg.male_share);
    cfg.unknown_sex_share = j.value("unknown_sex_share", cfg.unknown_sex_share);
    cfg.unknown_age_share = j.value("unknown_age_share", cfg.unknown_age_share);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

nlohmann::json SynthConfig::to_json() const {
    nlohmann::json j;
    j["years"] = std::to_string(years.first) + ":" + std::to_string(years.last);
    const std::array<const char*, 6> names{"alpha", "beta1", "beta2", "beta3", "beta4", "sigma"};
    for (std::size_t k = 0; k < names.size(); ++k) {
        j["trends"][names[k]] = {{"slope", trends[k].slope}, {"intercept", trends[k].intercept}};
    }
    j["shocks"] = nlohmann::json::object();
    for (const auto& [year, s] : shocks) {
        j["shocks"][std::to_string(year)] = {
            {"mass", s.mass}, {"first_week", s.first_week}, {"last_week", s.last_week}};
    }
    j["registration_lag_share"] = registration_lag_share;
    j["non_illness_share"] = non_illness_share;
    j["male_share"] = male_share;
    j["unknown_sex_share"] = unknown_sex_share;
    j["unknown_age_share"] = unknown_age_share;
    j["seed"] = seed;
    return j;
}

const YearTruth& GroundTruth::year(int y) const {
    for (const auto& t : years) {
        if (t.year == y) {
            return t;
        }
    }
    throw std::out_of_range("no ground truth for " + std::to_string(y));
}

nlohmann::json GroundTruth::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : years) {
        out.push_back({{"year", t.year},
                       {"coefficients", t.coefficients},
                       {"sigma", t.sigma},
                       {"weekly_counts", t.counts},
                       {"week53_count", t.week53_count},
                       {"shock_mass", t.shock_mass},
                       {"illness_total", t.illness_total},
                       {"non_illness_total", t.non_illness_total},
                       {"lagged_registrations", t.lagged_registrations}});
    }
    return {{"years", out}};
}

SynthRegistry generate_registry(const SynthConfig& config) {
    config.validate();
    SynthRegistry out;

    for (int year : config.years.years()) {
        auto rng = year_stream(config.seed, year);
        std::normal_distribution<double> noise{0.0, 1.0};
        std::uniform_real_distribution<double> unit{0.0, 1.0};
        std::uniform_int_distribution<int> weekday{0, 6};
        std::uniform_int_distribution<std::size_t> illness_code{0, kIllnessCodes.size() - 1};
        std::uniform_int_distribution<std::size_t> other_code{0, kNonIllnessCodes.size() - 1};

        const bool leap = is_leap_year(year);
        YearTruth truth;
        truth.year = year;
        truth.coefficients = config.coefficients(year);
        truth.sigma = config.sigma(year);

        for (int w = 1; w <= kFullWeeks; ++w) {
            const double mean = evaluate_quartic(truth.coefficients, w);
            truth.counts[static_cast<std::size_t>(w - 1)] = std::max<std::int64_t>(
                0, std::llround(mean + truth.sigma * noise(rng)));
        }
        const double partial = partial_week_days(leap) / 7.0;
        truth.week53_count = std::max<std::int64_t>(
            0, std::llround(evaluate_quartic(truth.coefficients, kPartialWeek) * partial +
                            truth.sigma * partial * noise(rng)));

        if (auto it = config.shocks.find(year); it != config.shocks.end()) {
            const auto& shock = it->second;
            const auto mass = std::llround(shock.mass);
            const int weeks = shock.last_week - shock.first_week + 1;
            for (int k = 0; k < weeks; ++k) {
                const auto extra = mass / weeks + (k < mass % weeks ? 1 : 0);
                truth.counts[static_cast<std::size_t>(shock.first_week - 1 + k)] += extra;
            }
            truth.shock_mass = mass;
        }

        auto emit = [&](int doy, bool illness) {
            DeathRecord r;
            r.occurrence = date_from_day_of_year(year, doy);
            r.registration_year = year;
            if (unit(rng) < config.registration_lag_share) {
                r.registration_year = year + 1;
                ++truth.lagged_registrations;
            }
            if (unit(rng) < config.unknown_sex_share) {
                r.sex = Sex::unknown;
            } else {
                r.sex = unit(rng) < config.male_share ? Sex::male : Sex::female;
            }
            if (unit(rng) < config.unknown_age_share) {
                r.age_years.reset();
            } else {
                r.age_years = draw_age(rng);
            }
            r.cause_code = illness ? kIllnessCodes[illness_code(rng)] : kNonIllnessCodes[other_code(rng)];
            out.records.push_back(std::move(r));
        };

        for (int w = 1; w <= kFullWeeks; ++w) {
            for (std::int64_t i = 0; i < truth.counts[static_cast<std::size_t>(w - 1)]; ++i) {
                emit(7 * (w - 1) + 1 + weekday(rng), true);
            }
        }
        std::uniform_int_distribution<int> partial_day{7 * kFullWeeks + 1, days_in_year(year)};
        for (std::int64_t i = 0; i < truth.week53_count; ++i) {
            emit(partial_day(rng), true);
        }

        truth.illness_total =
            std::accumulate(truth.counts.begin(), truth.counts.end(), std::int64_t{0}) +
            truth.week53_count;
        truth.non_illness_total =
            std::llround(static_cast<double>(truth.illness_total) * config.non_illness_share /
                         (1.0 - config.non_illness_share));
        std::uniform_int_distribution<int> any_day{1, days_in_year(year)};
        for (std::int64_t i = 0; i < truth.non_illness_total; ++i) {
            emit(any_day(rng), false);
        }
        out.truth.years.push_back(truth);
    }
    return out;
}

double ground_truth_excess(const GroundTruth& truth, YearRange period) {
    double total = 0.0;
    for (const auto& t : truth.years) {
        if (period.contains(t.year)) {
            total += static_cast<double>(t.shock_mass);
        }
    }
    return total;
}

PopulationTable synthetic_population(const SynthConfig& config, double total) {
    struct Bounds {
        AgeGroup group;
        double lo;
        double hi;
    };
    const std::array<Bounds, 9> brackets{{{AgeGroup::y0_5, 0, 6},
                                          {AgeGroup::y6_10, 6, 11},
                                          {AgeGroup::y11_19, 11, 20},
                                          {AgeGroup::y20_29, 20, 30},
                                          {AgeGroup::y30_39, 30, 40},
                                          {AgeGroup::y40_49, 40, 50},
                                          {AgeGroup::y50_59, 50, 60},
                                          {AgeGroup::y60_69, 60, 70},
                                          {AgeGroup::y70_plus, 70, kAgeCeiling}}};
    PopulationTable table;
    for (int y : config.years.years()) {
        for (const auto& b : brackets) {
            const double share = age_cdf(b.hi) - age_cdf(b.lo);
            table.set(y, {SexGroup::male, b.group}, total * config.male_share * share);
            table.set(y, {SexGroup::female, b.group}, total * (1.0 - config.male_share) * share);
        }
    }
    table.fill_aggregates();
    return table;
}

SynthConfig seasonal_config(YearRange years, int anchor_year, double level, double growth,
                            double sigma, std::uint64_t seed) {
    // Shape in the centred week v = w - 26.5: level (1 + 0.45 (v/25.5)^2 + 0.25 (v/25.5)^4)
    // with a slight tilt 0.02 v/25.5 so that odd powers are present too.
    constexpr double a = 26.5;
    constexpr double s = 25.5;
    const std::array<double, 5> shape_u{1.0, 0.02, 0.45, 0.0, 0.25};
    std::array<double, 5> raw{};
    constexpr std::array<std::array<double, 5>, 5> binom{{
        {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}}};
    for (std::size_t j = 0; j < 5; ++j) {
        for (std::size_t k = 0; k <= j; ++k) {
            raw[k] += shape_u[j] / std::pow(s, static_cast<double>(j)) * binom[j][k] *
                      std::pow(-a, static_cast<double>(j - k));
        }
    }
    SynthConfig cfg;
    cfg.years = years;
    cfg.seed = seed;
    for (std::size_t k = 0; k < 5; ++k) {
        const double value = level * raw[k];
        cfg.trends[k] = LinearTrend::through(anchor_year, value, value * growth);
    }
    cfg.trends[5] = LinearTrend::through(anchor_year, sigma, sigma * growth);
    return cfg;
}

}  // namespace polyexcess::synth
