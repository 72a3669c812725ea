#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polyexcess {

/// Number of complete seven-day weeks in the standardized calendar.
inline constexpr int kFullWeeks = 52;

/// Index of the partial week holding day 365 (and 366 in leap years).
inline constexpr int kPartialWeek = 53;

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;
};

[[nodiscard]] bool is_leap_year(int year) noexcept;
[[nodiscard]] int days_in_year(int year) noexcept;
[[nodiscard]] bool is_valid_date(const Date& date) noexcept;

/// 1-based ordinal day within the year. Throws std::invalid_argument on invalid dates.
[[nodiscard]] int day_of_year(const Date& date);

[[nodiscard]] Date date_from_day_of_year(int year, int day_of_year);

/// Standardized week: week 1 is days 1-7, week 52 is days 358-364 and
/// week 53 collects whatever is left of the year (one or two days).
class WeekIndex {
public:
    explicit WeekIndex(int week);

    [[nodiscard]] int value() const noexcept { return week_; }
    [[nodiscard]] bool is_partial() const noexcept { return week_ == kPartialWeek; }

    auto operator<=>(const WeekIndex&) const = default;

private:
    int week_;
};

[[nodiscard]] WeekIndex week_of(const Date& date);

/// Week for a day-of-year in [1, 366].
[[nodiscard]] WeekIndex week_of_day(int day_of_year);

/// Days covered by `week`: 7 for weeks 1-52, 1 or 2 for week 53.
[[nodiscard]] int days_in_week(int week, bool leap);

/// Days in the partial week, the `l` of the week-53 estimator.
[[nodiscard]] inline int partial_week_days(bool leap) noexcept { return leap ? 2 : 1; }

/// Inclusive range of calendar years.
struct YearRange {
    int first = 0;
    int last = 0;

    YearRange() = default;
    YearRange(int first_year, int last_year);

    [[nodiscard]] bool contains(int year) const noexcept { return year >= first && year <= last; }
    [[nodiscard]] int size() const noexcept { return last - first + 1; }
    [[nodiscard]] std::vector<int> years() const;
    [[nodiscard]] bool overlaps(const YearRange& other) const noexcept {
        return first <= other.last && other.first <= last;
    }

    /// "2020" for single years, "2020-2022" otherwise.
    [[nodiscard]] std::string label() const;

    auto operator<=>(const YearRange&) const = default;
};

/// Parses "A:B", "A-B" or a single year "A".
[[nodiscard]] YearRange parse_year_range(std::string_view text);

}  // namespace polyexcess
