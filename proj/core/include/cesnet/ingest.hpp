#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cesnet/date.hpp"

namespace cesnet {

enum class NodeKind { feature, activity };
/// `full` keeps individual terms as nodes, `grouped` pools them by class.
enum class Grouping { full, grouped };
/// What to do with a row that names an unknown term or fails validation.
enum class RowPolicy { skip, strict };

std::string_view to_string(NodeKind k);
std::string_view to_string(Grouping g);
Grouping parse_grouping(std::string_view s);

/// One observed co-occurrence of a nature feature and a human activity.
struct EventRecord {
    Date date;
    std::string feature;
    std::string activity;
    std::string user;
    std::int64_t count = 1;

    bool operator==(const EventRecord&) const = default;
};

/// Term-to-class mapping for both node kinds. Terms and classes are case-folded.
/// Terms and classes keep their order of first appearance.
class Taxonomy {
public:
    /// Adds a term. Re-adding with the same class is a no-op; a different
    /// class throws InputError naming the term.
    void add(NodeKind kind, std::string_view term, std::string_view cls);

    bool contains(NodeKind kind, std::string_view term) const;
    const std::string& class_of(NodeKind kind, std::string_view term) const;

    const std::vector<std::string>& terms(NodeKind kind) const { return side(kind).terms; }
    const std::vector<std::string>& classes(NodeKind kind) const { return side(kind).classes; }
    std::vector<std::string> members(NodeKind kind, std::string_view cls) const;

    /// Node labels for a grouping: terms for `full`, classes for `grouped`.
    const std::vector<std::string>& labels(NodeKind kind, Grouping g) const;
    /// Position of `term`'s node within `labels(kind, g)`.
    std::size_t node_index(NodeKind kind, Grouping g, std::string_view term) const;
    std::size_t class_index(NodeKind kind, std::string_view cls) const;

    /// Terms per class.
    std::map<std::string, std::size_t> cardinality(NodeKind kind) const;
    /// Throws InputError unless the repertoire has exactly the declared sizes.
    void check_cardinality(NodeKind kind, std::size_t n_terms, std::size_t n_classes) const;

private:
    struct Side {
        std::vector<std::string> terms;
        std::vector<std::string> classes;
        std::unordered_map<std::string, std::size_t> term_class;  // term -> class index
        std::unordered_map<std::string, std::size_t> term_pos;
        std::unordered_map<std::string, std::size_t> class_pos;
    };
    const Side& side(NodeKind k) const { return k == NodeKind::feature ? features_ : activities_; }
    Side& side(NodeKind k) { return k == NodeKind::feature ? features_ : activities_; }

    Side features_;
    Side activities_;
};

/// Reads a `kind,term,class` CSV with header.
Taxonomy load_taxonomy(const std::filesystem::path& path);
Taxonomy read_taxonomy(std::istream& in);

struct ParseIssue {
    std::size_t line = 0;
    std::string message;
};

struct ParseResult {
    std::vector<EventRecord> records;
    std::vector<ParseIssue> skipped;
};

enum class EventFormat { csv, jsonl };

/// Format from the file extension: `.jsonl`/`.ndjson` are JSON lines, anything else CSV.
EventFormat detect_format(const std::filesystem::path& path);

/// Parses an event file. Rows with unknown terms or invalid fields are
/// skipped and reported under RowPolicy::skip, and abort with InputError
/// (carrying the line number) under RowPolicy::strict.
ParseResult parse_events(const std::filesystem::path& path, const Taxonomy& taxonomy,
                         RowPolicy policy = RowPolicy::skip);
ParseResult parse_events(std::istream& in, EventFormat format, const Taxonomy& taxonomy,
                         RowPolicy policy = RowPolicy::skip);

void write_events_csv(std::ostream& out, std::span<const EventRecord> records);

/// Integer counts indexed (feature, activity, day). Silent days are explicit zeros.
class DailyCounts {
public:
    DailyCounts() = default;
    DailyCounts(std::vector<std::string> features, std::vector<std::string> activities,
                DayRange window, Grouping grouping);

    std::size_t n_features() const { return features_.size(); }
    std::size_t n_activities() const { return activities_.size(); }
    std::size_t n_days() const { return window_.size(); }
    const std::vector<std::string>& features() const { return features_; }
    const std::vector<std::string>& activities() const { return activities_; }
    const DayRange& window() const { return window_; }
    Grouping grouping() const { return grouping_; }

    std::int64_t& at(std::size_t f, std::size_t a, std::size_t d) {
        return counts_[f + n_features() * (a + n_activities() * d)];
    }
    std::int64_t at(std::size_t f, std::size_t a, std::size_t d) const {
        return counts_[f + n_features() * (a + n_activities() * d)];
    }
    /// Flat storage, feature index fastest, then activity, then day.
    std::span<const std::int64_t> data() const { return counts_; }

    std::int64_t total() const;
    /// Sum over all cells for each day.
    std::vector<std::int64_t> daily_totals() const;
    /// Daily series of a single (feature, activity) cell.
    std::vector<std::int64_t> cell_series(std::size_t f, std::size_t a) const;

    /// Elementwise sum. Axes must match.
    DailyCounts& operator+=(const DailyCounts& other);
    bool operator==(const DailyCounts&) const = default;

private:
    std::vector<std::string> features_;
    std::vector<std::string> activities_;
    DayRange window_{};
    Grouping grouping_ = Grouping::full;
    std::vector<std::int64_t> counts_;
};

/// Sums record counts into (feature, activity, day) cells of `window`.
/// Records dated outside the window are ignored. Throws InputError on an
/// empty window or a record whose terms the taxonomy does not know.
DailyCounts aggregate(std::span<const EventRecord> records, const Taxonomy& taxonomy,
                      Grouping grouping, const DayRange& window);

}  // namespace cesnet
