#include "cesnet/exogenous.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "cesnet/csv.hpp"
#include "cesnet/error.hpp"

namespace cesnet {

namespace {

std::size_t pick_column(const std::vector<std::string>& header, std::initializer_list<std::string_view> names,
                        std::string_view what) {
    for (auto n : names)
        if (auto c = csv::find_column(header, n)) return *c;
    // prefix match, e.g. StringencyIndex_Average
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto h = csv::lower(csv::trim(header[i]));
        for (auto n : names)
            if (h.starts_with(csv::lower(n))) return i;
    }
    throw InputError(fmt::format("stringency CSV has no {} column", what));
}

}  // namespace

StringencyTable read_stringency_table(std::istream& in) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw InputError("stringency CSV is empty");
    const auto cc = pick_column(*header, {"countrycode", "country_code", "country"}, "country");
    const auto cdate = pick_column(*header, {"date"}, "date");
    const auto cs = pick_column(*header, {"stringencyindex", "stringency"}, "stringency");

    StringencyTable t;
    while (auto row = reader.next()) {
        if (row->size() != header->size())
            throw InputError(fmt::format("stringency line {}: expected {} fields, got {}", reader.line(),
                                         header->size(), row->size()));
        auto text = csv::trim((*row)[cs]);
        if (text.empty()) continue;
        double v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
            throw InputError(fmt::format("stringency line {}: bad value '{}'", reader.line(), text));
        if (v < 0 || v > 100)
            throw InputError(fmt::format("stringency line {}: value {} outside [0, 100]", reader.line(), v));
        Date d;
        try {
            d = Date::parse(csv::trim((*row)[cdate]), true);
        } catch (const InputError& e) {
            throw InputError(fmt::format("stringency line {}: {}", reader.line(), e.what()));
        }
        auto country = std::string(csv::trim((*row)[cc]));
        if (country.empty()) throw InputError(fmt::format("stringency line {}: missing country", reader.line()));
        t.by_country[country][d] = v;
    }
    return t;
}

StringencyTable load_stringency_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
    return read_stringency_table(in);
}

std::vector<std::string> default_countries() { return {"GB", "US", "CA", "AU", "NZ", "IE"}; }

namespace {

// Two- and three-letter codes of the default countries name the same entry.
const std::map<Date, double>* find_country(const StringencyTable& table, const std::string& code) {
    static const std::map<std::string, std::string> alias = {
        {"GB", "GBR"}, {"US", "USA"}, {"CA", "CAN"}, {"AU", "AUS"}, {"NZ", "NZL"}, {"IE", "IRL"},
        {"GBR", "GB"}, {"USA", "US"}, {"CAN", "CA"}, {"AUS", "AU"}, {"NZL", "NZ"}, {"IRL", "IE"}};
    if (auto it = table.by_country.find(code); it != table.by_country.end()) return &it->second;
    if (auto a = alias.find(code); a != alias.end())
        if (auto it = table.by_country.find(a->second); it != table.by_country.end()) return &it->second;
    return nullptr;
}

}  // namespace

StringencySeries median_stringency(const StringencyTable& table, const std::vector<std::string>& countries) {
    StringencySeries out;
    std::optional<Date> first, last;
    std::vector<const std::map<Date, double>*> present;
    for (const auto& c : countries) {
        const auto* m = find_country(table, c);
        if (!m || m->empty() || std::find(present.begin(), present.end(), m) != present.end()) continue;
        present.push_back(m);
        out.countries.push_back(c);
        if (!first || m->begin()->first < *first) first = m->begin()->first;
        if (!last || m->rbegin()->first > *last) last = m->rbegin()->first;
    }
    if (out.countries.empty())
        throw InputError("none of the requested countries is present in the stringency table");

    DayRange range{*first, *last};
    out.series.start = *first;
    out.series.values.assign(range.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> day;
    for (std::size_t i = 0; i < range.size(); ++i) {
        day.clear();
        for (const auto* m : present)
            if (auto it = m->find(range.at(i)); it != m->end()) day.push_back(it->second);
        if (day.empty()) continue;
        std::sort(day.begin(), day.end());
        auto n = day.size();
        out.series.values[i] = n % 2 ? day[n / 2] : 0.5 * (day[n / 2 - 1] + day[n / 2]);
    }
    return out;
}

TimeSeries fill_stringency(const StringencySeries& x, const DayRange& window) {
    DayRange overlap = window.intersect(x.series.range());
    if (overlap.empty())
        throw InputError(fmt::format("window {} does not overlap stringency data {}", window.str(),
                                     x.series.range().str()));
    // fill over the whole record so a gap at the window start inherits the
    // last value observed before it
    TimeSeries full = x.series;
    auto& v = full.values;
    auto first = std::find_if(v.begin(), v.end(), [](double s) { return !std::isnan(s); });
    if (first == v.end()) throw InputError("stringency series has no observations");
    std::fill(v.begin(), first, *first);
    for (auto it = first + 1; it != v.end(); ++it)
        if (std::isnan(*it)) *it = *(it - 1);
    return full.slice(overlap);
}

AlignedPair align(const StringencySeries& x, const TimeSeries& y, const DayRange& window) {
    DayRange overlap = window.intersect(x.series.range()).intersect(y.range());
    if (overlap.empty())
        throw InputError(fmt::format("no overlap between window {}, stringency {} and series {}", window.str(),
                                     x.series.range().str(), y.range().str()));
    return {fill_stringency(x, overlap), y.slice(overlap)};
}

}  // namespace cesnet
