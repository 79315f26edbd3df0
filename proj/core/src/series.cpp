#include "cesnet/series.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "cesnet/csv.hpp"
#include "cesnet/error.hpp"
#include "cesnet/labeled_matrix.hpp"

namespace cesnet {

TimeSeries TimeSeries::slice(const DayRange& window) const {
    auto r = range();
    if (window.empty() || !r.contains(window.first) || !r.contains(window.last))
        throw InputError(fmt::format("window {} is outside the series range {}", window.str(), r.str()));
    auto b = values.begin() + static_cast<std::ptrdiff_t>(r.index(window.first));
    return {window.first, std::vector<double>(b, b + static_cast<std::ptrdiff_t>(window.size()))};
}

TimeSeries to_series(Date start, std::span<const std::int64_t> counts) {
    TimeSeries s{start, {}};
    s.values.reserve(counts.size());
    for (auto c : counts) s.values.push_back(static_cast<double>(c));
    return s;
}

TimeSeries log1p(const TimeSeries& s) {
    TimeSeries out = s;
    for (auto& v : out.values) {
        if (v <= -1.0) throw InputError("log1p needs values greater than -1");
        v = std::log1p(v);
    }
    return out;
}

TimeSeries read_series_csv(std::istream& in) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || header->size() < 2) throw InputError("series CSV needs a header date,value");
    auto cd = csv::find_column(*header, "date").value_or(0);
    std::size_t cv = cd == 0 ? 1 : 0;
    TimeSeries s;
    std::optional<Date> prev;
    while (auto row = reader.next()) {
        if (row->size() != header->size())
            throw InputError(fmt::format("series line {}: expected {} fields", reader.line(), header->size()));
        Date d = Date::parse(csv::trim((*row)[cd]), true);
        auto text = csv::trim((*row)[cv]);
        double v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
            throw InputError(fmt::format("series line {}: bad value '{}'", reader.line(), text));
        if (!prev)
            s.start = d;
        else if (d - *prev != 1)
            throw InputError(fmt::format("series line {}: dates must be consecutive days", reader.line()));
        prev = d;
        s.values.push_back(v);
    }
    if (s.values.empty()) throw InputError("series CSV has no rows");
    return s;
}

void write_series_csv(std::ostream& out, const TimeSeries& s, const char* value_column) {
    out << "date," << value_column << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) out << s.date(i).iso() << ',' << format_number(s.values[i]) << '\n';
}

}  // namespace cesnet
