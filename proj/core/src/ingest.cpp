#include "cesnet/ingest.hpp"

#include <fstream>
#include <numeric>
#include <optional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cesnet/csv.hpp"
#include "cesnet/error.hpp"

namespace cesnet {

std::string_view to_string(NodeKind k) { return k == NodeKind::feature ? "feature" : "activity"; }
std::string_view to_string(Grouping g) { return g == Grouping::full ? "full" : "grouped"; }

Grouping parse_grouping(std::string_view s) {
    if (s == "full") return Grouping::full;
    if (s == "grouped") return Grouping::grouped;
    throw InputError(fmt::format("unknown grouping '{}' (expected full|grouped)", s));
}

// ---------------------------------------------------------------------------
// Taxonomy

void Taxonomy::add(NodeKind kind, std::string_view term_in, std::string_view cls_in) {
    auto term = csv::lower(csv::trim(term_in));
    auto cls = csv::lower(csv::trim(cls_in));
    if (term.empty()) throw InputError("taxonomy entry with empty term");
    if (cls.empty()) throw InputError(fmt::format("term '{}' has an empty class", term));

    Side& s = side(kind);
    auto [cit, new_class] = s.class_pos.try_emplace(cls, s.classes.size());
    if (new_class) s.classes.push_back(cls);

    if (auto it = s.term_class.find(term); it != s.term_class.end()) {
        if (it->second != cit->second)
            throw InputError(fmt::format("{} term '{}' mapped to both '{}' and '{}'", to_string(kind),
                                         term, s.classes[it->second], cls));
        return;
    }
    s.term_class.emplace(term, cit->second);
    s.term_pos.emplace(term, s.terms.size());
    s.terms.push_back(term);
}

bool Taxonomy::contains(NodeKind kind, std::string_view term) const {
    return side(kind).term_class.count(std::string(term)) > 0;
}

const std::string& Taxonomy::class_of(NodeKind kind, std::string_view term) const {
    const Side& s = side(kind);
    auto it = s.term_class.find(std::string(term));
    if (it == s.term_class.end())
        throw InputError(fmt::format("unknown {} term '{}'", to_string(kind), term));
    return s.classes[it->second];
}

std::vector<std::string> Taxonomy::members(NodeKind kind, std::string_view cls) const {
    std::vector<std::string> out;
    const auto key = csv::lower(cls);
    for (const auto& t : terms(kind))
        if (class_of(kind, t) == key) out.push_back(t);
    return out;
}

const std::vector<std::string>& Taxonomy::labels(NodeKind kind, Grouping g) const {
    return g == Grouping::full ? terms(kind) : classes(kind);
}

std::size_t Taxonomy::node_index(NodeKind kind, Grouping g, std::string_view term) const {
    const Side& s = side(kind);
    const auto& map = g == Grouping::full ? s.term_pos : s.term_class;
    auto it = map.find(std::string(term));
    if (it == map.end()) throw InputError(fmt::format("unknown {} term '{}'", to_string(kind), term));
    return it->second;
}

std::size_t Taxonomy::class_index(NodeKind kind, std::string_view cls) const {
    const Side& s = side(kind);
    auto it = s.class_pos.find(csv::lower(cls));
    if (it == s.class_pos.end())
        throw InputError(fmt::format("unknown {} class '{}'", to_string(kind), cls));
    return it->second;
}

std::map<std::string, std::size_t> Taxonomy::cardinality(NodeKind kind) const {
    std::map<std::string, std::size_t> out;
    for (const auto& c : classes(kind)) out[c] = 0;
    for (const auto& t : terms(kind)) ++out[class_of(kind, t)];
    return out;
}

void Taxonomy::check_cardinality(NodeKind kind, std::size_t n_terms, std::size_t n_classes) const {
    if (terms(kind).size() != n_terms || classes(kind).size() != n_classes)
        throw InputError(fmt::format("{} repertoire has {} terms in {} classes, expected {} in {}",
                                     to_string(kind), terms(kind).size(), classes(kind).size(),
                                     n_terms, n_classes));
}

Taxonomy read_taxonomy(std::istream& in) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw InputError("taxonomy file is empty");
    auto ck = csv::find_column(*header, "kind");
    auto ct = csv::find_column(*header, "term");
    auto cc = csv::find_column(*header, "class");
    if (!ck || !ct || !cc) throw InputError("taxonomy header must contain kind,term,class");

    Taxonomy tax;
    while (auto row = reader.next()) {
        if (row->size() != header->size())
            throw InputError(fmt::format("taxonomy line {}: expected {} fields, got {}", reader.line(),
                                         header->size(), row->size()));
        auto kind = csv::lower(csv::trim((*row)[*ck]));
        NodeKind k;
        if (kind == "feature")
            k = NodeKind::feature;
        else if (kind == "activity")
            k = NodeKind::activity;
        else
            throw InputError(fmt::format("taxonomy line {}: unknown kind '{}'", reader.line(), kind));
        try {
            tax.add(k, (*row)[*ct], (*row)[*cc]);
        } catch (const InputError& e) {
            throw InputError(fmt::format("taxonomy line {}: {}", reader.line(), e.what()));
        }
    }
    return tax;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot read taxonomy file '{}'", path.string()));
    return read_taxonomy(in);
}

// ---------------------------------------------------------------------------
// Event parsing

EventFormat detect_format(const std::filesystem::path& path) {
    auto ext = csv::lower(path.extension().string());
    return (ext == ".jsonl" || ext == ".ndjson") ? EventFormat::jsonl : EventFormat::csv;
}

namespace {

struct RawRow {
    std::string date, feature, activity, user;
    std::optional<std::string> count;
};

EventRecord validate(const RawRow& raw, const Taxonomy& taxonomy) {
    EventRecord rec;
    rec.date = Date::parse(csv::trim(raw.date));
    rec.feature = csv::lower(csv::trim(raw.feature));
    rec.activity = csv::lower(csv::trim(raw.activity));
    rec.user = csv::trim(raw.user);
    if (rec.user.empty()) throw InputError("missing user");
    if (raw.count && !csv::trim(*raw.count).empty()) {
        auto text = csv::trim(*raw.count);
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size()) throw InputError(fmt::format("malformed count '{}'", text));
        if (v <= 0) throw InputError(fmt::format("count must be positive, got {}", v));
        rec.count = v;
    }
    if (!taxonomy.contains(NodeKind::feature, rec.feature))
        throw InputError(fmt::format("unknown feature term '{}'", rec.feature));
    if (!taxonomy.contains(NodeKind::activity, rec.activity))
        throw InputError(fmt::format("unknown activity term '{}'", rec.activity));
    return rec;
}

void handle(ParseResult& result, std::size_t line, const RawRow& raw, const Taxonomy& taxonomy,
            RowPolicy policy) {
    try {
        result.records.push_back(validate(raw, taxonomy));
    } catch (const InputError& e) {
        if (policy == RowPolicy::strict) throw InputError(fmt::format("line {}: {}", line, e.what()));
        result.skipped.push_back({line, e.what()});
    }
}

void parse_csv(std::istream& in, const Taxonomy& taxonomy, RowPolicy policy, ParseResult& result) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw InputError("event file is empty (header required)");
    auto cd = csv::find_column(*header, "date");
    auto cf = csv::find_column(*header, "feature");
    auto ca = csv::find_column(*header, "activity");
    auto cu = csv::find_column(*header, "user");
    auto cn = csv::find_column(*header, "count");
    if (!cd || !cf || !ca || !cu)
        throw InputError("event header must contain date,feature,activity,user[,count]");

    // a trailing count column may be left off row by row
    const bool count_last = cn && *cn + 1 == header->size();
    while (auto row = reader.next()) {
        if (count_last && row->size() + 1 == header->size()) row->emplace_back();
        if (row->size() != header->size()) {
            auto msg = fmt::format("expected {} fields, got {}", header->size(), row->size());
            if (policy == RowPolicy::strict)
                throw InputError(fmt::format("line {}: {}", reader.line(), msg));
            result.skipped.push_back({reader.line(), msg});
            continue;
        }
        RawRow raw{(*row)[*cd], (*row)[*cf], (*row)[*ca], (*row)[*cu], std::nullopt};
        if (cn) raw.count = (*row)[*cn];
        handle(result, reader.line(), raw, taxonomy, policy);
    }
}

void parse_jsonl(std::istream& in, const Taxonomy& taxonomy, RowPolicy policy, ParseResult& result) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::trim(line).empty() || csv::trim(line) == "\r") continue;
        RawRow raw;
        try {
            auto j = nlohmann::json::parse(line);
            auto str = [&](const char* key) -> std::string {
                if (!j.contains(key) || !j[key].is_string())
                    throw InputError(fmt::format("missing string field '{}'", key));
                return j[key].get<std::string>();
            };
            raw.date = str("date");
            raw.feature = str("feature");
            raw.activity = str("activity");
            raw.user = str("user");
            if (j.contains("count")) {
                const auto& c = j["count"];
                if (c.is_number_integer())
                    raw.count = std::to_string(c.get<long long>());
                else if (c.is_string())
                    raw.count = c.get<std::string>();
                else
                    throw InputError("count must be an integer");
            }
        } catch (const nlohmann::json::exception& e) {
            if (policy == RowPolicy::strict)
                throw InputError(fmt::format("line {}: invalid JSON: {}", lineno, e.what()));
            result.skipped.push_back({lineno, fmt::format("invalid JSON: {}", e.what())});
            continue;
        } catch (const InputError& e) {
            if (policy == RowPolicy::strict) throw InputError(fmt::format("line {}: {}", lineno, e.what()));
            result.skipped.push_back({lineno, e.what()});
            continue;
        }
        handle(result, lineno, raw, taxonomy, policy);
    }
}

}  // namespace

ParseResult parse_events(std::istream& in, EventFormat format, const Taxonomy& taxonomy,
                         RowPolicy policy) {
    ParseResult result;
    if (format == EventFormat::csv)
        parse_csv(in, taxonomy, policy, result);
    else
        parse_jsonl(in, taxonomy, policy, result);
    return result;
}

ParseResult parse_events(const std::filesystem::path& path, const Taxonomy& taxonomy, RowPolicy policy) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot read event file '{}'", path.string()));
    return parse_events(in, detect_format(path), taxonomy, policy);
}

void write_events_csv(std::ostream& out, std::span<const EventRecord> records) {
    out << "date,feature,activity,user,count\n";
    for (const auto& r : records)
        out << r.date.iso() << ',' << csv::escape(r.feature) << ',' << csv::escape(r.activity) << ','
            << csv::escape(r.user) << ',' << r.count << '\n';
}

// ---------------------------------------------------------------------------
// Daily counts

DailyCounts::DailyCounts(std::vector<std::string> features, std::vector<std::string> activities,
                         DayRange window, Grouping grouping)
    : features_(std::move(features)),
      activities_(std::move(activities)),
      window_(window),
      grouping_(grouping) {
    if (window_.empty()) throw InputError("empty aggregation window");
    counts_.assign(features_.size() * activities_.size() * window_.size(), 0);
}

std::int64_t DailyCounts::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::vector<std::int64_t> DailyCounts::daily_totals() const {
    const std::size_t cells = n_features() * n_activities();
    std::vector<std::int64_t> out(n_days(), 0);
    for (std::size_t d = 0; d < n_days(); ++d)
        out[d] = std::accumulate(counts_.begin() + static_cast<std::ptrdiff_t>(d * cells),
                                 counts_.begin() + static_cast<std::ptrdiff_t>((d + 1) * cells),
                                 std::int64_t{0});
    return out;
}

std::vector<std::int64_t> DailyCounts::cell_series(std::size_t f, std::size_t a) const {
    std::vector<std::int64_t> out(n_days());
    for (std::size_t d = 0; d < n_days(); ++d) out[d] = at(f, a, d);
    return out;
}

DailyCounts& DailyCounts::operator+=(const DailyCounts& other) {
    if (features_ != other.features_ || activities_ != other.activities_ || window_ != other.window_)
        throw InputError("cannot combine daily counts with different axes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

DailyCounts aggregate(std::span<const EventRecord> records, const Taxonomy& taxonomy, Grouping grouping,
                      const DayRange& window) {
    DailyCounts out(taxonomy.labels(NodeKind::feature, grouping),
                    taxonomy.labels(NodeKind::activity, grouping), window, grouping);
    for (const auto& r : records) {
        if (!window.contains(r.date)) continue;
        auto f = taxonomy.node_index(NodeKind::feature, grouping, r.feature);
        auto a = taxonomy.node_index(NodeKind::activity, grouping, r.activity);
        out.at(f, a, window.index(r.date)) += r.count;
    }
    return out;
}

}  // namespace cesnet
