#pragma once

#include "polyexcess/calendar.hpp"
#include "polyexcess/strata.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polyexcess {

enum class CauseClass { illness, non_illness };

[[nodiscard]] std::string_view to_string(CauseClass cause) noexcept;
[[nodiscard]] CauseClass parse_cause_class(std::string_view text);

/// One row of a death registry after field parsing.
struct DeathRecord {
    Date occurrence;
    int registration_year = 0;
    Sex sex = Sex::unknown;
    std::optional<int> age_years;
    std::string cause_code;
};

/// One row of the normalized record file consumed by aggregation.
struct CanonicalRecord {
    int occurrence_year = 0;
    int week = 1;
    Sex sex = Sex::unknown;
    std::optional<int> age_years;
    CauseClass cause_class = CauseClass::illness;

    auto operator<=>(const CanonicalRecord&) const = default;
};

struct RejectEntry {
    std::string source;
    std::size_t row = 0;
    std::string reason;
};

/// Names of the registry columns holding each field.
struct ColumnSchema {
    std::string year = "year";
    std::string month = "month";
    std::string day = "day";
    std::string registration_year = "registration_year";
    std::string sex = "sex";
    std::string age = "age";
    std::string cause = "cause";
};

/// How the age column is coded. `inegi` is the four-digit unit+value code used
/// by the Mexican registry (4xxx = years, 1xxx-3xxx = under one year, x998 unknown).
enum class AgeEncoding { years, inegi };

/// Byte encoding of registry files; Latin-1 input is converted to UTF-8 on read.
enum class TextEncoding { utf8, latin1 };

[[nodiscard]] std::string latin1_to_utf8(std::string_view text);

inline const std::vector<std::string> kDefaultNonIllnessPrefixes{"V", "W", "X", "Y"};

struct IngestConfig {
    ColumnSchema columns;
    char delimiter = ',';
    std::vector<std::string> non_illness_prefixes = kDefaultNonIllnessPrefixes;
    std::vector<std::string> male_codes{"male", "M", "1"};
    std::vector<std::string> female_codes{"female", "F", "2"};
    std::vector<std::string> unknown_sex_codes{"unknown", "", "NA", "9"};
    std::vector<std::string> unknown_age_codes{"", "NA"};
    AgeEncoding age_encoding = AgeEncoding::years;
    TextEncoding encoding = TextEncoding::utf8;

    /// Keys absent from `j` keep their defaults.
    [[nodiscard]] static IngestConfig from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;
};

struct IngestResult {
    std::vector<DeathRecord> records;
    std::vector<RejectEntry> rejects;
    std::size_t rows_read = 0;

    [[nodiscard]] std::size_t accepted() const noexcept { return records.size(); }
    [[nodiscard]] std::size_t rejected() const noexcept { return rejects.size(); }

    /// Appends `other`; order of merges does not affect the accepted/rejected totals.
    void merge(IngestResult&& other);
};

/// Parses a delimited registry. Malformed rows go to the reject log with their
/// row number; a missing mapped column raises ConfigError and an unreadable
/// stream IngestError.
[[nodiscard]] IngestResult parse_registry(std::istream& in, const IngestConfig& config,
                                          std::string_view source = {});

/// non_illness iff `cause_code` starts with one of `non_illness_prefixes`.
/// Throws ClassificationError on an empty code.
[[nodiscard]] CauseClass classify_cause(std::string_view cause_code,
                                        std::span<const std::string> non_illness_prefixes);

[[nodiscard]] CanonicalRecord canonicalize(const DeathRecord& record,
                                           std::span<const std::string> non_illness_prefixes);

[[nodiscard]] std::vector<CanonicalRecord> canonicalize(
    std::span<const DeathRecord> records, std::span<const std::string> non_illness_prefixes);

/// Percentage of non-illness deaths per occurrence year. Throws
/// std::invalid_argument on an empty input.
[[nodiscard]] std::map<int, double> non_illness_share_by_year(
    std::span<const DeathRecord> records, std::span<const std::string> non_illness_prefixes);
[[nodiscard]] std::map<int, double> non_illness_share_by_year(
    std::span<const CanonicalRecord> records);

void write_canonical(std::ostream& out, std::span<const CanonicalRecord> records);
[[nodiscard]] std::vector<CanonicalRecord> read_canonical(std::istream& in);

void write_reject_log(std::ostream& out, std::span<const RejectEntry> rejects);

/// Writes records in the default registry layout (readable with a default IngestConfig).
void write_registry(std::ostream& out, std::span<const DeathRecord> records);

}  // namespace polyexcess
