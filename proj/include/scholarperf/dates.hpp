#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace scholarperf {

/// Proleptic Gregorian calendar date.
struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    friend auto operator<=>(const Date&, const Date&) = default;

    /// Parses YYYY-MM-DD; throws InputError on anything else.
    static Date parse_iso(std::string_view text);
    std::string iso() const;

    std::chrono::sys_days to_days() const;
    static Date from_days(std::chrono::sys_days days);

    Date next_day() const;
};

/// Same month/day `years` later; Feb 29 maps to Feb 28 in non-leap years.
Date add_years(const Date& date, int years);

/// Number of completed anniversaries of `from` on or before `to` (0 if to < from).
int whole_years_between(const Date& from, const Date& to);

/// Completed anniversaries plus the elapsed share of the current anniversary
/// year, measured in days. Negative when `to` precedes `from`.
double fractional_years_between(const Date& from, const Date& to);

}  // namespace scholarperf
