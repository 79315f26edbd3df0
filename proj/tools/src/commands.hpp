#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cesnet::cli {

/// Flags shared by the subcommands. Each command reads the ones it needs.
struct Options {
    std::string events;
    std::string taxonomy;
    std::string grouping = "grouped";
    std::string window;
    std::string policy = "skip";
    std::uint64_t seed = 42;
    std::string out;
    double alpha = 0.95;
    bool log1p = false;
    bool svg = false;

    // network
    int restarts = 20;
    bool users = false;

    // hosvd
    bool center = false;
    bool normalize_days = false;
    std::string ranks;

    // spectral
    std::string series;
    std::string cell;
    double s0 = 2.0;
    double dj = 0.25;
    double omega0 = 6.0;
    std::string stringency;
    std::vector<std::string> countries;
    std::size_t surrogates = 100;

    // turnover
    std::string scope = "all";
    std::vector<std::string> pairs;
    std::string warmup;

    // synth
    std::string config;

    /// Options given on the command line, for the run manifest.
    std::map<std::string, std::string> given;
};

int run_ingest(const Options& o);
int run_build_network(const Options& o);
int run_network_stats(const Options& o);
int run_node_stats(const Options& o);
int run_hosvd(const Options& o);
int run_wavelet(const Options& o);
int run_xwt(const Options& o);
int run_turnover(const Options& o);
int run_stringency(const Options& o);
int run_synth(const Options& o);
int run_pipeline(const Options& o);

}  // namespace cesnet::cli
