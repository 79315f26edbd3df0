#include "cesnet/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cesnet/error.hpp"
#include "cesnet/random.hpp"

namespace cesnet {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) throw InputError(fmt::format("synth config: {} must be an object", where));
    for (const auto& [key, value] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw InputError(fmt::format("synth config: unknown key '{}' in {}", key, where));
}

template <typename T>
T get(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(fmt::format("synth config: key '{}' has the wrong type", key));
    }
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return get<T>(j, key, T{});
}

std::string required_string(const json& j, const char* key, std::string_view where) {
    if (!j.contains(key)) throw InputError(fmt::format("synth config: {} needs '{}'", where, key));
    return get<std::string>(j, key, "");
}

void check_class(const Taxonomy& tax, NodeKind kind, const std::string& cls) {
    if (tax.members(kind, cls).empty())
        throw InputError(fmt::format("synth config: unknown {} class '{}'", to_string(kind), cls));
}

void check_rate(double v, std::string_view what) {
    if (!std::isfinite(v) || v < 0) throw InputError(fmt::format("synth config: {} must be finite and >= 0", what));
}

void check_probability(double v, std::string_view what) {
    if (!(v >= 0 && v <= 1)) throw InputError(fmt::format("synth config: {} must lie in [0, 1]", what));
}

struct Cell {
    std::size_t f, a;  // class indices
    double rate, amplitude, period, phase;
    std::vector<std::string> features, activities;
};

std::string user_name(std::size_t id) { return fmt::format("u{:06d}", id); }

}  // namespace

void SynthConfig::validate(const Taxonomy& tax) const {
    if (window.empty()) throw InputError("synth config: empty window");
    check_rate(baseline_rate, "baseline_rate");
    if (!std::isfinite(amplitude) || !std::isfinite(phase)) throw InputError("synth config: non-finite seasonality");
    if (!(period > 0) || !std::isfinite(period)) throw InputError("synth config: period must be positive");
    for (const auto& c : cells) {
        check_class(tax, NodeKind::feature, c.feature_class);
        check_class(tax, NodeKind::activity, c.activity_class);
        check_rate(c.rate, "cell rate");
        if (c.period && !(*c.period > 0)) throw InputError("synth config: cell period must be positive");
    }
    for (const auto& i : impulses) {
        check_class(tax, NodeKind::feature, i.feature_class);
        check_class(tax, NodeKind::activity, i.activity_class);
        check_rate(i.factor, "impulse factor");
        if (i.range.empty() || !window.contains(i.range.first) || !window.contains(i.range.last))
            throw InputError(fmt::format("synth config: impulse {} outside window {}", i.range.str(), window.str()));
        if (i.newcomer_fraction) check_probability(*i.newcomer_fraction, "impulse newcomer_fraction");
    }
    check_probability(users.daily_activity, "daily_activity");
    check_probability(users.newcomer_fraction, "newcomer_fraction");
}

SynthConfig parse_synth_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(fmt::format("synth config: {}", e.what()));
    }
    check_keys(j,
               {"window", "seed", "baseline_rate", "amplitude", "period", "phase", "cells", "impulses", "users",
                "taxonomy"},
               "config");
    SynthConfig c;
    c.window = DayRange::parse(required_string(j, "window", "config"));
    c.seed = get<std::uint64_t>(j, "seed", c.seed);
    c.baseline_rate = get(j, "baseline_rate", c.baseline_rate);
    c.amplitude = get(j, "amplitude", c.amplitude);
    c.period = get(j, "period", c.period);
    c.phase = get(j, "phase", c.phase);
    for (const auto& e : j.value("cells", json::array())) {
        check_keys(e, {"feature_class", "activity_class", "rate", "amplitude", "period", "phase"}, "cells");
        c.cells.push_back({required_string(e, "feature_class", "cell"), required_string(e, "activity_class", "cell"),
                           get(e, "rate", c.baseline_rate), get_opt<double>(e, "amplitude"),
                           get_opt<double>(e, "period"), get_opt<double>(e, "phase")});
    }
    for (const auto& e : j.value("impulses", json::array())) {
        check_keys(e, {"feature_class", "activity_class", "window", "factor", "newcomer_fraction"}, "impulses");
        c.impulses.push_back({required_string(e, "feature_class", "impulse"),
                              required_string(e, "activity_class", "impulse"),
                              DayRange::parse(required_string(e, "window", "impulse")), get(e, "factor", 1.0),
                              get_opt<double>(e, "newcomer_fraction")});
    }
    if (j.contains("users")) {
        const auto& u = j.at("users");
        check_keys(u, {"initial_pool", "daily_activity", "newcomer_fraction"}, "users");
        c.users.initial_pool = get<std::size_t>(u, "initial_pool", c.users.initial_pool);
        c.users.daily_activity = get(u, "daily_activity", c.users.daily_activity);
        c.users.newcomer_fraction = get(u, "newcomer_fraction", c.users.newcomer_fraction);
    }
    if (j.contains("taxonomy")) {
        std::filesystem::path p = get<std::string>(j, "taxonomy", "");
        c.taxonomy = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_synth_config(ss.str(), path.parent_path());
}

std::vector<EventRecord> generate(const SynthConfig& config, const Taxonomy& tax) {
    config.validate(tax);
    const auto& fclasses = tax.classes(NodeKind::feature);
    const auto& aclasses = tax.classes(NodeKind::activity);

    std::vector<Cell> cells;
    for (std::size_t a = 0; a < aclasses.size(); ++a)
        for (std::size_t f = 0; f < fclasses.size(); ++f)
            cells.push_back({f, a, config.baseline_rate, config.amplitude, config.period, config.phase,
                             tax.members(NodeKind::feature, fclasses[f]),
                             tax.members(NodeKind::activity, aclasses[a])});
    auto cell_of = [&](const std::string& fc, const std::string& ac) -> Cell& {
        return cells[tax.class_index(NodeKind::feature, fc) +
                     fclasses.size() * tax.class_index(NodeKind::activity, ac)];
    };
    for (const auto& o : config.cells) {
        auto& c = cell_of(o.feature_class, o.activity_class);
        c.rate = o.rate;
        c.amplitude = o.amplitude.value_or(c.amplitude);
        c.period = o.period.value_or(c.period);
        c.phase = o.phase.value_or(c.phase);
    }

    // Separate streams keep counts independent of the user process.
    Rng count_rng(derive_seed(config.seed, 0));
    Rng term_rng(derive_seed(config.seed, 1));
    Rng user_rng(derive_seed(config.seed, 2));

    std::size_t pool = config.users.initial_pool;
    std::vector<std::size_t> active;
    std::vector<EventRecord> out;
    for (std::size_t d = 0; d < config.window.size(); ++d) {
        const Date day = config.window.at(d);
        const double t = static_cast<double>(d);

        // returning users active today, sampled without replacement (Floyd)
        active.clear();
        if (pool > 0) {
            std::binomial_distribution<std::size_t> n_active(pool, config.users.daily_activity);
            std::size_t k = n_active(user_rng);
            std::vector<char> taken(pool, 0);
            for (std::size_t j = pool - k; j < pool; ++j) {
                std::size_t r = uniform_index(user_rng, j + 1);
                std::size_t pick = taken[r] ? j : r;
                taken[pick] = 1;
                active.push_back(pick);
            }
        }

        for (auto& c : cells) {
            double mult = std::max(0.0, 1.0 + c.amplitude * std::sin(2.0 * std::numbers::pi * t / c.period + c.phase));
            double newcomer = config.users.newcomer_fraction;
            for (const auto& i : config.impulses)
                if (i.range.contains(day) && &cell_of(i.feature_class, i.activity_class) == &c) {
                    mult *= i.factor;
                    if (i.newcomer_fraction) newcomer = *i.newcomer_fraction;
                }
            const double lambda = c.rate * mult;
            if (lambda <= 0) continue;
            std::poisson_distribution<std::int64_t> events(lambda);
            const std::int64_t n = events(count_rng);
            for (std::int64_t e = 0; e < n; ++e) {
                EventRecord r;
                r.date = day;
                r.feature = c.features[uniform_index(term_rng, c.features.size())];
                r.activity = c.activities[uniform_index(term_rng, c.activities.size())];
                if (active.empty() || uniform01(user_rng) < newcomer) {
                    r.user = user_name(pool++);
                } else {
                    r.user = user_name(active[uniform_index(user_rng, active.size())]);
                }
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

}  // namespace cesnet
