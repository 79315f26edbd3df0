#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cesnet/date.hpp"

namespace cesnet {

/// Daily-sampled real series.
struct TimeSeries {
    Date start;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    DayRange range() const { return {start, start + static_cast<std::int64_t>(values.size()) - 1}; }
    Date date(std::size_t i) const { return start + static_cast<std::int64_t>(i); }

    /// Sub-series covering `window`, which must lie inside range().
    TimeSeries slice(const DayRange& window) const;
};

TimeSeries to_series(Date start, std::span<const std::int64_t> counts);
TimeSeries log1p(const TimeSeries& s);

/// Reads a `date,value` CSV (header required). Dates must be contiguous.
TimeSeries read_series_csv(std::istream& in);
void write_series_csv(std::ostream& out, const TimeSeries& s, const char* value_column = "value");

}  // namespace cesnet
