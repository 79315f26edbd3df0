#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cesnet/date.hpp"
#include "cesnet/series.hpp"

namespace cesnet {

/// Daily index values per country code.
struct StringencyTable {
    std::map<std::string, std::map<Date, double>> by_country;
};

/// Reads a government-response CSV. Column names are matched
/// case-insensitively: a country code column (`CountryCode`, `country_code`,
/// `country`), a date column (`Date`, `YYYYMMDD` or ISO) and a stringency
/// column (`StringencyIndex*`, `stringency`). Rows with an empty index are
/// ignored; values outside [0, 100] throw InputError.
StringencyTable read_stringency_table(std::istream& in);
StringencyTable load_stringency_table(const std::filesystem::path& path);

std::vector<std::string> default_countries();

struct StringencySeries {
    /// Contiguous days from the first to the last day with any data; days
    /// without data are NaN until aligned.
    TimeSeries series;
    std::vector<std::string> countries;
};

/// Per-day median across the listed countries that report that day.
/// Two- and three-letter codes of the default countries are interchangeable.
/// Throws InputError if none of them is in the table.
StringencySeries median_stringency(const StringencyTable& table, const std::vector<std::string>& countries);

/// Stringency over `window` ∩ its range. Gaps take the previous observed
/// value; days before the first observation take the first one.
TimeSeries fill_stringency(const StringencySeries& x, const DayRange& window);

struct AlignedPair {
    TimeSeries stringency;
    TimeSeries y;
};

/// Restricts both series to `window` ∩ their ranges, filling stringency
/// gaps as fill_stringency does. y is copied unchanged. Throws InputError
/// when the overlap is empty.
AlignedPair align(const StringencySeries& x, const TimeSeries& y, const DayRange& window);

}  // namespace cesnet
