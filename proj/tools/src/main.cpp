#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "cesnet/error.hpp"
#include "cesnet/manifest.hpp"
#include "commands.hpp"

namespace {

using cesnet::cli::Options;

enum Flag : unsigned {
    kEvents = 1 << 0,
    kWindow = 1 << 1,
    kGrouping = 1 << 2,
    kSeed = 1 << 3,
    kAlpha = 1 << 4,
    kLog1p = 1 << 5,
    kSvg = 1 << 6,
    kSpectral = 1 << 7,
    kRestarts = 1 << 8,
};

void add_common(CLI::App* app, Options& o, unsigned flags) {
    app->add_option("--out", o.out, "output directory (default: $CESNET_OUT or ./out)");
    if (flags & kEvents) {
        app->add_option("--events", o.events, "event file (CSV or JSONL)")->check(CLI::ExistingFile);
        app->add_option("--taxonomy", o.taxonomy, "taxonomy CSV kind,term,class")->check(CLI::ExistingFile);
        app->add_option("--policy", o.policy, "unknown or malformed rows: skip or strict")
            ->check(CLI::IsMember({"skip", "strict"}));
    }
    if (flags & kWindow) app->add_option("--window", o.window, "analysis window A:B (ISO dates)");
    if (flags & kGrouping)
        app->add_option("--grouping", o.grouping, "full or grouped")->check(CLI::IsMember({"full", "grouped"}));
    if (flags & kSeed) app->add_option("--seed", o.seed, "random seed");
    if (flags & kRestarts) app->add_option("--restarts", o.restarts, "modularity restarts")->check(CLI::PositiveNumber);
    if (flags & kAlpha) app->add_option("--alpha", o.alpha, "significance level")->check(CLI::Range(0.5, 0.9999));
    if (flags & kLog1p) app->add_flag("--log1p", o.log1p, "analyse log(1 + count)");
    if (flags & kSvg) app->add_flag("--svg", o.svg, "also write SVG figures");
    if (flags & kSpectral) {
        app->add_option("--s0", o.s0, "smallest scale in days")->check(CLI::PositiveNumber);
        app->add_option("--dj", o.dj, "scale step in octaves")->check(CLI::PositiveNumber);
        app->add_option("--omega0", o.omega0, "Morlet frequency")->check(CLI::PositiveNumber);
        app->add_option("--series", o.series, "date,value CSV instead of event totals")->check(CLI::ExistingFile);
        app->add_option("--cell", o.cell, "use one grouped cell 'feature class|activity class'");
    }
}

void record_given(const CLI::App* app, Options& o) {
    for (const auto* opt : app->get_options()) {
        if (opt->count() == 0) continue;
        auto name = opt->get_single_name();
        if (name == "help" || name == "out") continue;
        std::string value;
        for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        o.given[name] = value;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal bipartite co-occurrence analysis toolkit"};
    app.set_version_flag("--version", std::string(cesnet::version()));
    app.require_subcommand(1);
    Options o;
    std::function<int(const Options&)> run;

    auto sub = [&](const char* name, const char* help, unsigned flags, int (*fn)(const Options&)) {
        auto* s = app.add_subcommand(name, help);
        add_common(s, o, flags);
        s->callback([&, s, fn] {
            record_given(s, o);
            run = fn;
        });
        return s;
    };

    sub("ingest", "validate events and write daily counts", kEvents | kWindow | kGrouping, cesnet::cli::run_ingest);
    auto* bn = sub("build-network", "write the feature x activity weight matrix", kEvents | kWindow | kGrouping | kSvg,
                   cesnet::cli::run_build_network);
    bn->add_flag("--users", o.users, "weight links by distinct users");
    auto* ns = sub("network-stats", "global network statistics (JSON)", kEvents | kWindow | kGrouping | kSeed | kRestarts,
                   cesnet::cli::run_network_stats);
    ns->add_flag("--users", o.users, "weight links by distinct users");
    auto* nd = sub("node-stats", "per-node push/pull and nested rank (CSV)", kEvents | kWindow | kGrouping,
                   cesnet::cli::run_node_stats);
    nd->add_flag("--users", o.users, "weight links by distinct users");
    auto* hs = sub("hosvd", "higher-order SVD of the feature x activity x day tensor",
                   kEvents | kWindow | kGrouping | kSvg, cesnet::cli::run_hosvd);
    hs->add_flag("--center", o.center, "subtract each cell's mean over days");
    hs->add_flag("--normalize-days", o.normalize_days, "divide each day slice by its total");
    hs->add_option("--ranks", o.ranks, "truncation ranks F,A,D");
    sub("wavelet", "Morlet wavelet power spectrum of the daily series",
        kEvents | kWindow | kAlpha | kLog1p | kSvg | kSpectral, cesnet::cli::run_wavelet);
    auto* xw = sub("xwt", "cross-wavelet and coherence against stringency",
                   kEvents | kWindow | kAlpha | kLog1p | kSvg | kSpectral | kSeed, cesnet::cli::run_xwt);
    xw->add_option("--stringency", o.stringency, "government response CSV")->check(CLI::ExistingFile)->required();
    xw->add_option("--countries", o.countries, "country codes for the median")->delimiter(',');
    xw->add_option("--surrogates", o.surrogates, "Monte Carlo pairs for coherence thresholds");
    auto* tu = sub("turnover", "daily new-user ratio", kEvents | kWindow, cesnet::cli::run_turnover);
    tu->add_option("--scope", o.scope, "all, pair or both")->check(CLI::IsMember({"all", "pair", "both"}));
    tu->add_option("--pair", o.pairs, "class pair 'feature class|activity class' (repeatable)");
    tu->add_option("--warmup", o.warmup, "warmup range A:B (default: all days before the window)");
    auto* st = sub("stringency", "median stringency series", kWindow, cesnet::cli::run_stringency);
    st->add_option("--stringency", o.stringency, "government response CSV")->check(CLI::ExistingFile)->required();
    st->add_option("--countries", o.countries, "country codes for the median")->delimiter(',');
    auto* sy = sub("synth", "generate a synthetic event stream", kSeed, cesnet::cli::run_synth);
    sy->add_option("--config", o.config, "synth JSON config")->check(CLI::ExistingFile)->required();
    sy->add_option("--taxonomy", o.taxonomy, "taxonomy CSV (overrides the config)")->check(CLI::ExistingFile);
    auto* pl = sub("pipeline", "run the full analysis chain", kEvents | kWindow | kSeed | kRestarts | kAlpha | kLog1p,
                   cesnet::cli::run_pipeline);
    pl->add_option("--stringency", o.stringency, "government response CSV")->check(CLI::ExistingFile);
    pl->add_option("--countries", o.countries, "country codes for the median")->delimiter(',');
    pl->add_option("--pair", o.pairs, "class pair for turnover 'feature class|activity class' (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (o.out.empty()) {
        const char* env = std::getenv("CESNET_OUT");
        o.out = env && *env ? env : "out";
    }
    try {
        return run(o);
    } catch (const cesnet::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const cesnet::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    }
}
