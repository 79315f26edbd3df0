#include "cesnet/date.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "cesnet/error.hpp"

namespace cesnet {

namespace {

bool parse_digits(std::string_view s, int& out) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok())
        throw InputError(fmt::format("invalid calendar date {:04d}-{:02d}-{:02d}", year, month, day));
    days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text, bool allow_compact) {
    int y = 0, m = 0, d = 0;
    bool ok = false;
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        ok = parse_digits(text.substr(0, 4), y) && parse_digits(text.substr(5, 2), m) &&
             parse_digits(text.substr(8, 2), d);
    } else if (allow_compact && text.size() == 8) {
        ok = parse_digits(text.substr(0, 4), y) && parse_digits(text.substr(4, 2), m) &&
             parse_digits(text.substr(6, 2), d);
    }
    if (!ok || m < 1 || m > 12 || d < 1 || d > 31)
        throw InputError(fmt::format("malformed date '{}'", text));
    return Date{y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
}

int Date::year() const {
    return static_cast<int>(std::chrono::year_month_day{days_}.year());
}

std::string Date::iso() const {
    std::chrono::year_month_day ymd{days_};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

DayRange DayRange::parse(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw InputError(fmt::format("window '{}' is not of the form A:B", text));
    DayRange r{Date::parse(text.substr(0, colon)), Date::parse(text.substr(colon + 1))};
    if (r.empty()) throw InputError(fmt::format("window '{}' is empty", text));
    return r;
}

DayRange DayRange::year(int y) { return {Date{y, 1, 1}, Date{y, 12, 31}}; }

DayRange DayRange::intersect(const DayRange& other) const {
    return {std::max(first, other.first), std::min(last, other.last)};
}

std::string DayRange::str() const { return first.iso() + ":" + last.iso(); }

}  // namespace cesnet
