#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cesnet/date.hpp"
#include "cesnet/ingest.hpp"

namespace cesnet {

/// Rate override for one (feature class, activity class) cell.
struct CellRate {
    std::string feature_class;
    std::string activity_class;
    double rate = 0.0;
    std::optional<double> amplitude;
    std::optional<double> period;
    std::optional<double> phase;
};

/// Multiplies a cell's rate by `factor` over `range`. During the impulse,
/// that cell's events come from newcomers with `newcomer_fraction` when set.
struct Impulse {
    std::string feature_class;
    std::string activity_class;
    DayRange range;
    double factor = 1.0;
    std::optional<double> newcomer_fraction;
};

struct UserProcess {
    /// Users existing before the first day.
    std::size_t initial_pool = 1000;
    /// Probability that a pooled user is active on a given day.
    double daily_activity = 0.05;
    /// Probability that an event comes from a brand-new user.
    double newcomer_fraction = 0.02;
};

/// Events per day for a class-pair cell are
/// Poisson(rate * max(0, 1 + amplitude * sin(2 pi t / period + phase)) * impulse),
/// with t counted in days from the window start. Each event picks a term
/// uniformly within its feature and activity classes.
struct SynthConfig {
    DayRange window;
    std::uint64_t seed = 1;
    double baseline_rate = 4.0;
    double amplitude = 0.0;
    double period = 365.25;
    double phase = 0.0;
    std::vector<CellRate> cells;
    std::vector<Impulse> impulses;
    UserProcess users;
    /// Taxonomy file, relative paths resolved against the config file.
    std::optional<std::filesystem::path> taxonomy;

    /// Throws InputError on non-finite or negative rates, impulses outside
    /// the window, probabilities outside [0, 1] or unknown classes.
    void validate(const Taxonomy& taxonomy) const;
};

/// JSON keys: window ("A:B"), seed, baseline_rate, amplitude, period, phase,
/// cells [{feature_class, activity_class, rate, amplitude?, period?, phase?}],
/// impulses [{feature_class, activity_class, window, factor, newcomer_fraction?}],
/// users {initial_pool, daily_activity, newcomer_fraction}, taxonomy.
/// Unknown keys throw InputError.
SynthConfig parse_synth_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
SynthConfig load_synth_config(const std::filesystem::path& path);

/// Events in date order, one record per event (count 1). Deterministic in the seed.
std::vector<EventRecord> generate(const SynthConfig& config, const Taxonomy& taxonomy);

}  // namespace cesnet
