#include "scholarperf/dates.hpp"

#include <charconv>
#include <cstdio>

#include "scholarperf/error.hpp"

namespace scholarperf {

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (text.empty()) return false;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

Date Date::parse_iso(std::string_view text) {
    // YYYY-MM-DD, four-digit year
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw InputError("unparseable date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    Date d;
    if (!parse_number(text.substr(0, 4), d.year) || !parse_number(text.substr(5, 2), d.month) ||
        !parse_number(text.substr(8, 2), d.day))
        throw InputError("unparseable date '" + std::string(text) + "'");
    const std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{d.month},
                                          std::chrono::day{d.day}};
    if (!ymd.ok()) throw InputError("invalid calendar date '" + std::string(text) + "'");
    return d;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
    return buf;
}

std::chrono::sys_days Date::to_days() const {
    return std::chrono::sys_days{std::chrono::year_month_day{
        std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}};
}

Date Date::from_days(std::chrono::sys_days days) {
    const std::chrono::year_month_day ymd{days};
    return Date{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

Date Date::next_day() const { return from_days(to_days() + std::chrono::days{1}); }

Date add_years(const Date& date, int years) {
    Date out{date.year + years, date.month, date.day};
    const std::chrono::year_month_day ymd{std::chrono::year{out.year}, std::chrono::month{out.month},
                                          std::chrono::day{out.day}};
    if (!ymd.ok()) out.day = 28;  // Feb 29 in a non-leap year
    return out;
}

int whole_years_between(const Date& from, const Date& to) {
    if (to < from) return 0;
    int k = to.year - from.year;
    if (add_years(from, k) > to) --k;
    return k;
}

double fractional_years_between(const Date& from, const Date& to) {
    if (to < from) return -fractional_years_between(to, from);
    const int k = whole_years_between(from, to);
    const auto anniversary = add_years(from, k).to_days();
    const auto next = add_years(from, k + 1).to_days();
    const double elapsed = double((to.to_days() - anniversary).count());
    const double span = double((next - anniversary).count());
    return double(k) + elapsed / span;
}

}  // namespace scholarperf
