#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cesnet {

/// A calendar day. Stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses `YYYY-MM-DD`, or `YYYYMMDD` when `allow_compact` is set.
    static Date parse(std::string_view text, bool allow_compact = false);

    constexpr std::chrono::sys_days sys_days() const { return days_; }
    constexpr std::int64_t serial() const { return days_.time_since_epoch().count(); }
    int year() const;
    std::string iso() const;

    constexpr Date operator+(std::int64_t n) const {
        return Date{days_ + std::chrono::days{n}};
    }
    constexpr Date operator-(std::int64_t n) const {
        return Date{days_ - std::chrono::days{n}};
    }
    constexpr std::int64_t operator-(Date other) const {
        return (days_ - other.days_).count();
    }
    constexpr auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

/// Inclusive range of calendar days.
struct DayRange {
    Date first;
    Date last;

    /// Parses `A:B` with ISO dates on both sides.
    static DayRange parse(std::string_view text);
    static DayRange year(int y);

    bool empty() const { return last < first; }
    std::size_t size() const { return empty() ? 0 : static_cast<std::size_t>(last - first) + 1; }
    bool contains(Date d) const { return first <= d && d <= last; }
    /// Offset of `d` from `first`; caller guarantees containment.
    std::size_t index(Date d) const { return static_cast<std::size_t>(d - first); }
    Date at(std::size_t i) const { return first + static_cast<std::int64_t>(i); }
    DayRange intersect(const DayRange& other) const;
    std::string str() const;

    bool operator==(const DayRange&) const = default;
};

}  // namespace cesnet
