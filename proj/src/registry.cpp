#include "polyexcess/registry.hpp"

#include "polyexcess/csv.hpp"
#include "polyexcess/errors.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace polyexcess {

namespace {

bool contains(const std::vector<std::string>& values, std::string_view value) {
    return std::find(values.begin(), values.end(), value) != values.end();
}

std::string_view strip(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

std::optional<int> to_int(std::string_view text) {
    text = strip(text);
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return value;
}

struct ColumnIndex {
    std::size_t year, month, day, registration_year, sex, age, cause;
    std::size_t width;
};

ColumnIndex resolve_columns(const csv::Reader& reader, const ColumnSchema& schema) {
    auto need = [&](const std::string& name) {
        if (auto idx = reader.column(name)) {
            return *idx;
        }
        throw ConfigError("missing mapped column '" + name + "'");
    };
    ColumnIndex idx{need(schema.year), need(schema.month),
                    need(schema.day),  need(schema.registration_year),
                    need(schema.sex),  need(schema.age),
                    need(schema.cause), 0};
    idx.width = 1 + std::max({idx.year, idx.month, idx.day, idx.registration_year, idx.sex,
                              idx.age, idx.cause});
    return idx;
}

// Returns the reject reason, or an empty string when the age field is usable.
std::string parse_age(std::string_view raw, const IngestConfig& config,
                      std::optional<int>& age) {
    const auto text = strip(raw);
    if (contains(config.unknown_age_codes, text)) {
        age.reset();
        return {};
    }
    const auto value = to_int(text);
    if (!value || *value < 0) {
        return "invalid age";
    }
    switch (config.age_encoding) {
        case AgeEncoding::years:
            age = *value;
            return {};
        case AgeEncoding::inegi: {
            const int unit = *value / 1000;
            const int amount = *value % 1000;
            if (unit < 1 || unit > 4) {
                return "invalid age";
            }
            if (amount == 998 || amount == 999) {
                age.reset();
            } else {
                age = unit == 4 ? amount : 0;
            }
            return {};
        }
    }
    return "invalid age";
}

}  // namespace

std::string_view to_string(CauseClass cause) noexcept {
    return cause == CauseClass::illness ? "illness" : "non_illness";
}

CauseClass parse_cause_class(std::string_view text) {
    text = strip(text);
    if (text == "illness") return CauseClass::illness;
    if (text == "non_illness") return CauseClass::non_illness;
    throw std::invalid_argument("unknown cause class '" + std::string{text} + "'");
}

IngestConfig IngestConfig::from_json(const nlohmann::json& j) {
    IngestConfig cfg;
    if (j.contains("columns")) {
        const auto& c = j.at("columns");
        auto get = [&](const char* key, std::string& target) {
            if (c.contains(key)) {
                target = c.at(key).get<std::string>();
            }
        };
        get("year", cfg.columns.year);
        get("month", cfg.columns.month);
        get("day", cfg.columns.day);
        get("registration_year", cfg.columns.registration_year);
        get("sex", cfg.columns.sex);
        get("age", cfg.columns.age);
        get("cause", cfg.columns.cause);
    }
    if (j.contains("delimiter")) {
        const auto d = j.at("delimiter").get<std::string>();
        if (d.size() != 1) {
            throw ConfigError("delimiter must be a single character");
        }
        cfg.delimiter = d.front();
    }
    auto list = [&](const char* key, std::vector<std::string>& target) {
        if (j.contains(key)) {
            target = j.at(key).get<std::vector<std::string>>();
        }
    };
    list("non_illness_prefixes", cfg.non_illness_prefixes);
    list("male_codes", cfg.male_codes);
    list("female_codes", cfg.female_codes);
    list("unknown_sex_codes", cfg.unknown_sex_codes);
    list("unknown_age_codes", cfg.unknown_age_codes);
    if (j.contains("age_encoding")) {
        const auto enc = j.at("age_encoding").get<std::string>();
        if (enc == "years") {
            cfg.age_encoding = AgeEncoding::years;
        } else if (enc == "inegi") {
            cfg.age_encoding = AgeEncoding::inegi;
        } else {
            throw ConfigError("unknown age_encoding '" + enc + "'");
        }
    }
    if (j.contains("encoding")) {
        const auto enc = j.at("encoding").get<std::string>();
        if (enc == "utf-8" || enc == "utf8") {
            cfg.encoding = TextEncoding::utf8;
        } else if (enc == "latin-1" || enc == "latin1" || enc == "iso-8859-1") {
            cfg.encoding = TextEncoding::latin1;
        } else {
            throw ConfigError("unknown encoding '" + enc + "'");
        }
    }
    if (std::any_of(cfg.non_illness_prefixes.begin(), cfg.non_illness_prefixes.end(),
                    [](const std::string& p) { return p.empty(); })) {
        throw ConfigError("non-illness prefixes must be non-empty");
    }
    return cfg;
}

nlohmann::json IngestConfig::to_json() const {
    return {
        {"columns",
         {{"year", columns.year},
          {"month", columns.month},
          {"day", columns.day},
          {"registration_year", columns.registration_year},
          {"sex", columns.sex},
          {"age", columns.age},
          {"cause", columns.cause}}},
        {"delimiter", std::string(1, delimiter)},
        {"non_illness_prefixes", non_illness_prefixes},
        {"male_codes", male_codes},
        {"female_codes", female_codes},
        {"unknown_sex_codes", unknown_sex_codes},
        {"unknown_age_codes", unknown_age_codes},
        {"age_encoding", age_encoding == AgeEncoding::years ? "years" : "inegi"},
        {"encoding", encoding == TextEncoding::utf8 ? "utf-8" : "latin-1"},
    };
}

void IngestResult::merge(IngestResult&& other) {
    records.insert(records.end(), std::make_move_iterator(other.records.begin()),
                   std::make_move_iterator(other.records.end()));
    rejects.insert(rejects.end(), std::make_move_iterator(other.rejects.begin()),
                   std::make_move_iterator(other.rejects.end()));
    rows_read += other.rows_read;
    other = {};
}

std::string latin1_to_utf8(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80) {
            out.push_back(ch);
        } else {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

IngestResult parse_registry(std::istream& in, const IngestConfig& config, std::string_view source) {
    if (!in) {
        throw IngestError("unreadable registry stream" +
                          (source.empty() ? std::string{} : " '" + std::string{source} + "'"));
    }
    if (config.encoding == TextEncoding::latin1) {
        std::ostringstream raw;
        raw << in.rdbuf();
        std::istringstream converted(latin1_to_utf8(raw.str()));
        IngestConfig utf8_config = config;
        utf8_config.encoding = TextEncoding::utf8;
        return parse_registry(converted, utf8_config, source);
    }
    std::optional<csv::Reader> reader;
    try {
        reader.emplace(in, config.delimiter);
    } catch (const std::runtime_error& e) {
        throw IngestError(e.what());
    }
    const auto idx = resolve_columns(*reader, config.columns);

    IngestResult result;
    std::vector<std::string> fields;
    auto reject = [&](std::string reason) {
        result.rejects.push_back({std::string{source}, reader->row_number(), std::move(reason)});
    };

    while (reader->next(fields)) {
        ++result.rows_read;
        if (fields.size() < idx.width) {
            reject("short row");
            continue;
        }
        const auto y = to_int(fields[idx.year]);
        const auto m = to_int(fields[idx.month]);
        const auto d = to_int(fields[idx.day]);
        if (!y || !m || !d || !is_valid_date({*y, *m, *d})) {
            reject("invalid date");
            continue;
        }
        const auto reg = to_int(fields[idx.registration_year]);
        if (!reg) {
            reject("invalid registration year");
            continue;
        }
        if (*reg < *y) {
            reject("registered before occurrence");
            continue;
        }

        DeathRecord record;
        record.occurrence = {*y, *m, *d};
        record.registration_year = *reg;

        const auto sex = strip(fields[idx.sex]);
        if (contains(config.male_codes, sex)) {
            record.sex = Sex::male;
        } else if (contains(config.female_codes, sex)) {
            record.sex = Sex::female;
        } else if (contains(config.unknown_sex_codes, sex)) {
            record.sex = Sex::unknown;
        } else {
            reject("invalid sex");
            continue;
        }

        if (auto reason = parse_age(fields[idx.age], config, record.age_years); !reason.empty()) {
            reject(std::move(reason));
            continue;
        }

        record.cause_code = std::string{strip(fields[idx.cause])};
        if (record.cause_code.empty()) {
            reject("empty cause code");
            continue;
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

CauseClass classify_cause(std::string_view cause_code,
                          std::span<const std::string> non_illness_prefixes) {
    if (cause_code.empty()) {
        throw ClassificationError("empty cause code");
    }
    for (const auto& prefix : non_illness_prefixes) {
        if (!prefix.empty() && cause_code.starts_with(prefix)) {
            return CauseClass::non_illness;
        }
    }
    return CauseClass::illness;
}

CanonicalRecord canonicalize(const DeathRecord& record,
                             std::span<const std::string> non_illness_prefixes) {
    return {record.occurrence.year, week_of(record.occurrence).value(), record.sex,
            record.age_years, classify_cause(record.cause_code, non_illness_prefixes)};
}

std::vector<CanonicalRecord> canonicalize(std::span<const DeathRecord> records,
                                          std::span<const std::string> non_illness_prefixes) {
    std::vector<CanonicalRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(canonicalize(r, non_illness_prefixes));
    }
    return out;
}

namespace {

template <typename Range, typename YearOf, typename IsNonIllness>
std::map<int, double> share_by_year(const Range& records, YearOf year_of, IsNonIllness non_illness) {
    if (records.empty()) {
        throw std::invalid_argument("non-illness share requires at least one record");
    }
    std::map<int, std::pair<std::size_t, std::size_t>> counts;  // year -> (non-illness, all)
    for (const auto& r : records) {
        auto& c = counts[year_of(r)];
        c.first += non_illness(r) ? 1 : 0;
        ++c.second;
    }
    std::map<int, double> share;
    for (const auto& [year, c] : counts) {
        share[year] = 100.0 * static_cast<double>(c.first) / static_cast<double>(c.second);
    }
    return share;
}

}  // namespace

std::map<int, double> non_illness_share_by_year(std::span<const DeathRecord> records,
                                                std::span<const std::string> prefixes) {
    return share_by_year(
        records, [](const DeathRecord& r) { return r.occurrence.year; },
        [&](const DeathRecord& r) {
            return classify_cause(r.cause_code, prefixes) == CauseClass::non_illness;
        });
}

std::map<int, double> non_illness_share_by_year(std::span<const CanonicalRecord> records) {
    return share_by_year(
        records, [](const CanonicalRecord& r) { return r.occurrence_year; },
        [](const CanonicalRecord& r) { return r.cause_class == CauseClass::non_illness; });
}

void write_canonical(std::ostream& out, std::span<const CanonicalRecord> records) {
    out << "occurrence_year,week,sex,age_years,cause_class\n";
    for (const auto& r : records) {
        out << r.occurrence_year << ',' << r.week << ',' << to_string(r.sex) << ',';
        if (r.age_years) {
            out << *r.age_years;
        } else {
            out << "NA";
        }
        out << ',' << to_string(r.cause_class) << '\n';
    }
}

std::vector<CanonicalRecord> read_canonical(std::istream& in) {
    if (!in) {
        throw IngestError("unreadable canonical record stream");
    }
    std::optional<csv::Reader> reader;
    try {
        reader.emplace(in);
    } catch (const std::runtime_error& e) {
        throw IngestError(e.what());
    }
    std::size_t c_year = 0, c_week = 0, c_sex = 0, c_age = 0, c_cause = 0;
    try {
        c_year = reader->require_column("occurrence_year");
        c_week = reader->require_column("week");
        c_sex = reader->require_column("sex");
        c_age = reader->require_column("age_years");
        c_cause = reader->require_column("cause_class");
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string{"canonical file: "} + e.what());
    }
    const auto width = 1 + std::max({c_year, c_week, c_sex, c_age, c_cause});

    std::vector<CanonicalRecord> out;
    std::vector<std::string> f;
    while (reader->next(f)) {
        try {
            if (f.size() < width) {
                throw std::invalid_argument("short row");
            }
            CanonicalRecord r;
            r.occurrence_year = csv::parse_int(f[c_year]);
            r.week = WeekIndex{csv::parse_int(f[c_week])}.value();
            r.sex = parse_sex(f[c_sex]);
            const auto age = strip(f[c_age]);
            if (age != "NA" && !age.empty()) {
                r.age_years = csv::parse_int(age);
            }
            r.cause_class = parse_cause_class(f[c_cause]);
            out.push_back(r);
        } catch (const std::invalid_argument& e) {
            throw IngestError("canonical file row " + std::to_string(reader->row_number()) + ": " +
                              e.what());
        }
    }
    return out;
}

void write_reject_log(std::ostream& out, std::span<const RejectEntry> rejects) {
    out << "source,row,reason\n";
    for (const auto& r : rejects) {
        csv::write_row(out, {r.source, std::to_string(r.row), r.reason});
    }
}

void write_registry(std::ostream& out, std::span<const DeathRecord> records) {
    out << "year,month,day,registration_year,sex,age,cause\n";
    for (const auto& r : records) {
        out << r.occurrence.year << ',' << r.occurrence.month << ',' << r.occurrence.day << ','
            << r.registration_year << ',' << to_string(r.sex) << ',';
        if (r.age_years) {
            out << *r.age_years;
        } else {
            out << "NA";
        }
        out << ',' << r.cause_code << '\n';
    }
}

}  // namespace polyexcess
