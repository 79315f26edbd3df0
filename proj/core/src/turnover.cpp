#include "cesnet/turnover.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "cesnet/csv.hpp"
#include "cesnet/error.hpp"
#include "cesnet/labeled_matrix.hpp"

namespace cesnet {

BipartiteNetwork user_network(std::span<const EventRecord> records, const Taxonomy& taxonomy, Grouping grouping,
                              const DayRange& window) {
    if (window.empty()) throw InputError("empty analysis window");
    const auto& features = taxonomy.labels(NodeKind::feature, grouping);
    const auto& activities = taxonomy.labels(NodeKind::activity, grouping);
    std::set<std::tuple<std::size_t, std::size_t, std::string_view>> seen;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(features.size()),
                                              static_cast<Eigen::Index>(activities.size()));
    for (const auto& r : records) {
        if (!window.contains(r.date)) continue;
        if (r.user.empty()) throw InputError(fmt::format("record on {} has no user", r.date.iso()));
        auto f = taxonomy.node_index(NodeKind::feature, grouping, r.feature);
        auto a = taxonomy.node_index(NodeKind::activity, grouping, r.activity);
        if (seen.emplace(f, a, r.user).second) w(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(a)) += 1;
    }
    return {features, activities, std::move(w)};
}

std::string TurnoverScope::label() const {
    return is_global() ? "all" : fmt::format("{}|{}", *feature_class, activity_class.value_or(""));
}

TurnoverSeries new_user_ratio(std::span<const EventRecord> records, const Taxonomy& taxonomy,
                              const TurnoverScope& scope, const DayRange& window, const DayRange& warmup) {
    if (window.empty()) throw InputError("empty analysis window");
    if (!warmup.empty() && warmup.last >= window.first)
        throw InputError(fmt::format("warmup {} must end before the window {}", warmup.str(), window.str()));
    if (scope.feature_class.has_value() != scope.activity_class.has_value())
        throw InputError("a pair scope needs both a feature class and an activity class");
    if (!scope.is_global()) {
        for (auto [kind, cls] : {std::pair{NodeKind::feature, &*scope.feature_class},
                                 std::pair{NodeKind::activity, &*scope.activity_class}}) {
            if (taxonomy.members(kind, *cls).empty())
                throw InputError(fmt::format("{} class '{}' has no terms", to_string(kind), *cls));
        }
    }
    const std::string fc = scope.is_global() ? "" : csv::lower(*scope.feature_class);
    const std::string ac = scope.is_global() ? "" : csv::lower(*scope.activity_class);
    auto in_scope = [&](const EventRecord& r) {
        return scope.is_global() || (taxonomy.class_of(NodeKind::feature, r.feature) == fc &&
                                     taxonomy.class_of(NodeKind::activity, r.activity) == ac);
    };

    // First in-scope day per user, and users active per window day.
    std::unordered_map<std::string_view, Date> first_seen;
    std::vector<std::unordered_set<std::string_view>> active(window.size());
    for (const auto& r : records) {
        bool in_warmup = !warmup.empty() && warmup.contains(r.date);
        if (!(in_warmup || window.contains(r.date)) || !in_scope(r)) continue;
        if (r.user.empty()) throw InputError(fmt::format("record on {} has no user", r.date.iso()));
        auto [it, inserted] = first_seen.emplace(r.user, r.date);
        if (!inserted && r.date < it->second) it->second = r.date;
        if (window.contains(r.date)) active[window.index(r.date)].insert(r.user);
    }

    TurnoverSeries s{scope.label(), window, {}, {}, {}};
    for (std::size_t d = 0; d < window.size(); ++d) {
        const Date day = window.at(d);
        std::size_t fresh = static_cast<std::size_t>(
            std::count_if(active[d].begin(), active[d].end(), [&](auto u) { return first_seen.at(u) == day; }));
        s.active_users.push_back(active[d].size());
        s.new_users.push_back(fresh);
        s.ratio.push_back(active[d].empty() ? std::nullopt
                                            : std::optional{static_cast<double>(fresh) /
                                                            static_cast<double>(active[d].size())});
    }
    return s;
}

DayRange default_warmup(std::span<const EventRecord> records, const DayRange& window) {
    std::optional<Date> earliest;
    for (const auto& r : records)
        if (!earliest || r.date < *earliest) earliest = r.date;
    if (!earliest || *earliest >= window.first) return {window.first, window.first - 1};
    return {*earliest, window.first - 1};
}

void write_turnover_csv(std::ostream& out, std::span<const TurnoverSeries> series) {
    out << "date,scope,active_users,new_users,ratio\n";
    for (const auto& s : series)
        for (std::size_t d = 0; d < s.window.size(); ++d) {
            out << s.window.at(d).iso() << ',' << csv::escape(s.scope) << ',' << s.active_users[d] << ','
                << s.new_users[d] << ',';
            if (s.ratio[d]) out << format_number(*s.ratio[d]);
            out << '\n';
        }
}

}  // namespace cesnet
