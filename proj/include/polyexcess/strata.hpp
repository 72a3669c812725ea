#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polyexcess {

/// Sex as recorded on a death certificate.
enum class Sex { male, female, unknown };

/// Sex dimension of the estimation grid. `both` includes unknown-sex records.
enum class SexGroup { male, female, both };

/// Age dimension of the estimation grid. `all` is the union of the nine
/// brackets plus records with unknown age.
enum class AgeGroup { y0_5, y6_10, y11_19, y20_29, y30_39, y40_49, y50_59, y60_69, y70_plus, all };

inline constexpr std::array<AgeGroup, 9> kAgeBrackets{
    AgeGroup::y0_5,   AgeGroup::y6_10,  AgeGroup::y11_19, AgeGroup::y20_29,  AgeGroup::y30_39,
    AgeGroup::y40_49, AgeGroup::y50_59, AgeGroup::y60_69, AgeGroup::y70_plus};

inline constexpr std::array<AgeGroup, 10> kAgeGroups{
    AgeGroup::y0_5,   AgeGroup::y6_10,  AgeGroup::y11_19, AgeGroup::y20_29,   AgeGroup::y30_39,
    AgeGroup::y40_49, AgeGroup::y50_59, AgeGroup::y60_69, AgeGroup::y70_plus, AgeGroup::all};

inline constexpr std::array<SexGroup, 3> kSexGroups{SexGroup::male, SexGroup::female,
                                                    SexGroup::both};

struct StratumKey {
    SexGroup sex = SexGroup::both;
    AgeGroup age = AgeGroup::all;

    auto operator<=>(const StratumKey&) const = default;
};

/// The specific bracket containing `age_years`; nullopt for unknown age.
[[nodiscard]] std::optional<AgeGroup> age_bracket(std::optional<int> age_years);

[[nodiscard]] bool sex_matches(SexGroup group, Sex sex) noexcept;
[[nodiscard]] bool age_matches(AgeGroup group, std::optional<int> age_years) noexcept;
[[nodiscard]] bool stratum_contains(const StratumKey& key, Sex sex,
                                    std::optional<int> age_years) noexcept;

/// All 30 (sex, age group) cells, ordered sex-major.
[[nodiscard]] std::vector<StratumKey> full_grid();

[[nodiscard]] std::string_view to_string(Sex sex) noexcept;
[[nodiscard]] std::string_view to_string(SexGroup sex) noexcept;
[[nodiscard]] std::string_view to_string(AgeGroup age) noexcept;
[[nodiscard]] std::string to_string(const StratumKey& key);

/// Inverse of to_string. Throw std::invalid_argument on unknown labels.
[[nodiscard]] Sex parse_sex(std::string_view text);
[[nodiscard]] SexGroup parse_sex_group(std::string_view text);
[[nodiscard]] AgeGroup parse_age_group(std::string_view text);

/// Parses "sex:age" (e.g. "male:60-69", "both:all").
[[nodiscard]] StratumKey parse_stratum(std::string_view text);

/// Parses a comma separated stratum list; "grid" selects every cell.
[[nodiscard]] std::vector<StratumKey> parse_strata(std::string_view text);

}  // namespace polyexcess
