#include "polyexcess/calendar.hpp"

#include "polyexcess/errors.hpp"

#include <charconv>
#include <chrono>
#include <string>

namespace polyexcess {

namespace {

std::chrono::year_month_day to_ymd(const Date& date) {
    return std::chrono::year{date.year} / std::chrono::month{static_cast<unsigned>(date.month)} /
           std::chrono::day{static_cast<unsigned>(date.day)};
}

}  // namespace

bool is_leap_year(int year) noexcept { return std::chrono::year{year}.is_leap(); }

int days_in_year(int year) noexcept { return is_leap_year(year) ? 366 : 365; }

bool is_valid_date(const Date& date) noexcept {
    if (date.month < 1 || date.month > 12 || date.day < 1 || date.day > 31) {
        return false;
    }
    return to_ymd(date).ok();
}

int day_of_year(const Date& date) {
    if (!is_valid_date(date)) {
        throw std::invalid_argument("invalid date " + std::to_string(date.year) + "-" +
                                    std::to_string(date.month) + "-" + std::to_string(date.day));
    }
    using namespace std::chrono;
    const auto jan1 = sys_days{year{date.year} / January / 1};
    return static_cast<int>((sys_days{to_ymd(date)} - jan1).count()) + 1;
}

Date date_from_day_of_year(int year, int doy) {
    if (doy < 1 || doy > days_in_year(year)) {
        throw std::invalid_argument("day of year " + std::to_string(doy) + " out of range for " +
                                    std::to_string(year));
    }
    using namespace std::chrono;
    const year_month_day ymd{sys_days{std::chrono::year{year} / January / 1} + days{doy - 1}};
    return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
            static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

WeekIndex::WeekIndex(int week) : week_{week} {
    if (week < 1 || week > kPartialWeek) {
        throw std::invalid_argument("week index out of range: " + std::to_string(week));
    }
}

WeekIndex week_of_day(int doy) {
    if (doy < 1 || doy > 366) {
        throw std::invalid_argument("day of year out of range: " + std::to_string(doy));
    }
    if (doy > 7 * kFullWeeks) {
        return WeekIndex{kPartialWeek};
    }
    return WeekIndex{(doy + 6) / 7};
}

WeekIndex week_of(const Date& date) { return week_of_day(day_of_year(date)); }

int days_in_week(int week, bool leap) {
    if (week < 1 || week > kPartialWeek) {
        throw std::invalid_argument("week index out of range: " + std::to_string(week));
    }
    return week == kPartialWeek ? partial_week_days(leap) : 7;
}

YearRange::YearRange(int first_year, int last_year) : first{first_year}, last{last_year} {
    if (last < first) {
        throw ConfigError("empty year range " + std::to_string(first) + ":" +
                                    std::to_string(last));
    }
}

std::vector<int> YearRange::years() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (int y = first; y <= last; ++y) {
        out.push_back(y);
    }
    return out;
}

std::string YearRange::label() const {
    return first == last ? std::to_string(first)
                         : std::to_string(first) + "-" + std::to_string(last);
}

YearRange parse_year_range(std::string_view text) {
    auto parse_int = [&](std::string_view part) {
        int value = 0;
        const auto* end = part.data() + part.size();
        const auto [ptr, ec] = std::from_chars(part.data(), end, value);
        if (ec != std::errc{} || ptr != end || part.empty()) {
            throw ConfigError("malformed year range '" + std::string{text} + "'");
        }
        return value;
    };
    const auto sep = text.find_first_of(":-");
    if (sep == std::string_view::npos) {
        const int y = parse_int(text);
        return {y, y};
    }
    return {parse_int(text.substr(0, sep)), parse_int(text.substr(sep + 1))};
}

}  // namespace polyexcess
