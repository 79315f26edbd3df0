#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cesnet/date.hpp"
#include "cesnet/ingest.hpp"
#include "cesnet/network.hpp"

namespace cesnet {

/// Bipartite network weighted by the number of distinct users per cell
/// within `window`. Throws InputError if an in-window record has no user.
BipartiteNetwork user_network(std::span<const EventRecord> records, const Taxonomy& taxonomy, Grouping grouping,
                              const DayRange& window);

/// Which records count towards novelty: all of them, or only those whose
/// feature and activity fall in the given classes.
struct TurnoverScope {
    std::optional<std::string> feature_class;
    std::optional<std::string> activity_class;

    static TurnoverScope global() { return {}; }
    static TurnoverScope pair(std::string feature_class, std::string activity_class) {
        return {std::move(feature_class), std::move(activity_class)};
    }
    bool is_global() const { return !feature_class; }
    /// `all` or `<feature class>|<activity class>`.
    std::string label() const;
};

struct TurnoverSeries {
    std::string scope;
    DayRange window;
    std::vector<std::size_t> active_users;
    std::vector<std::size_t> new_users;
    /// new / active; empty on days without active users.
    std::vector<std::optional<double>> ratio;
};

/// Daily share of in-scope active users appearing in scope for the first
/// time. Users seen in `warmup` are never new within `window`. The warmup
/// must end before the window starts; an empty warmup means none.
TurnoverSeries new_user_ratio(std::span<const EventRecord> records, const Taxonomy& taxonomy,
                              const TurnoverScope& scope, const DayRange& window, const DayRange& warmup);

/// Every day before `window` that any record touches.
DayRange default_warmup(std::span<const EventRecord> records, const DayRange& window);

/// CSV `date,scope,active_users,new_users,ratio`; a missing ratio is an empty field.
void write_turnover_csv(std::ostream& out, std::span<const TurnoverSeries> series);

}  // namespace cesnet
