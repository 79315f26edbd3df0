// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: cesnet_acceptance <path to cesnet CLI>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "cesnet/error.hpp"
#include "cesnet/ingest.hpp"
#include "cesnet/network.hpp"
#include "cesnet/spectral.hpp"
#include "cesnet/synth.hpp"
#include "cesnet/tensor.hpp"
#include "cesnet/turnover.hpp"

namespace fs = std::filesystem;
using namespace cesnet;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string g(double v) { return fmt::format("{:.6g}", v); }

// ---------------------------------------------------------------------------

// Sample class names with synthetic terms spread round-robin: 39 features in
// 11 classes and 186 activities in 16 classes.
Taxonomy repertoire_taxonomy() {
    auto sample = load_taxonomy(CESNET_SAMPLE_DATA "/taxonomy.csv");
    const auto& fc = sample.classes(NodeKind::feature);
    const auto& ac = sample.classes(NodeKind::activity);
    Taxonomy t;
    for (std::size_t i = 0; i < 39; ++i) t.add(NodeKind::feature, fmt::format("feature{:02}", i), fc[i % fc.size()]);
    for (std::size_t i = 0; i < 186; ++i) t.add(NodeKind::activity, fmt::format("activity{:03}", i), ac[i % ac.size()]);
    return t;
}

Outcome web_asymmetry_exact() {
    auto tax = repertoire_taxonomy();
    SynthConfig cfg;
    cfg.window = DayRange::parse("2020-01-01:2020-03-31");
    cfg.seed = 1;
    cfg.baseline_rate = 20;
    auto recs = generate(cfg, tax);
    auto grouped = build_network(aggregate(recs, tax, Grouping::grouped, cfg.window), cfg.window);
    auto full = build_network(aggregate(recs, tax, Grouping::full, cfg.window), cfg.window);

    auto t0 = Clock::now();
    double wg = web_asymmetry(grouped);
    double wf = web_asymmetry(full);
    double elapsed = ms_since(t0);

    bool shape = grouped.active().n_features() == 11 && grouped.active().n_activities() == 16 &&
                 full.active().n_features() == 39 && full.active().n_activities() == 186;
    double eg = std::abs(wg - 5.0 / 27.0), ef = std::abs(wf - 147.0 / 225.0);
    return {shape && eg <= 1e-9 && ef <= 1e-9 && elapsed < 1.0,
            fmt::format("grouped {} (|err| {:.1e}), full {} (|err| {:.1e}), {:.3f} ms", g(wg), eg, g(wf), ef, elapsed)};
}

Outcome nested_rank_grid() {
    int bad = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(2, seed));
        auto r = nested_rank(gen::random_network(rng, 11, 16));
        std::set<double> f(r.features.begin(), r.features.end()), a(r.activities.begin(), r.activities.end());
        std::set<double> fe, ae;
        for (int k = 0; k <= 10; ++k) fe.insert(k / 10.0);
        for (int k = 0; k <= 15; ++k) ae.insert(k / 15.0);
        bad += !(f == fe && a == ae);
    }
    return {bad == 0, fmt::format("{} of 100 networks off the k/10, k/15 grid", bad)};
}

Outcome oracle_equivalence() {
    auto t0 = Clock::now();
    int wnodf_cases = 0;
    double wnodf_dev = 0;
    for (int rows = 1; rows <= 4; ++rows)
        for (int cols = 1; cols <= 4; ++cols) {
            if (rows == 1 && cols == 1) continue;
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                Rng rng(derive_seed(3, seed * 16 + static_cast<std::uint64_t>(rows * 4 + cols)));
                auto w = gen::int_matrix(rng, rows, cols, 5);
                double got = weighted_nestedness(gen::network(w.cast<double>()));
                wnodf_dev = std::max(wnodf_dev, std::abs(got - oracle::wnodf(w)));
                ++wnodf_cases;
            }
        }
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(4, seed));
        Eigen::MatrixXd w = gen::int_matrix(rng, gen::integer(rng, 2, 4), gen::integer(rng, 2, 4), 4).cast<double>();
        auto exact = oracle::best_modularity(w);
        auto found = bipartite_modularity(gen::network(w), {20, seed});
        hits += std::abs(found.q - exact.q) <= 1e-12;
    }
    double elapsed = ms_since(t0) / 1000.0;
    // WNODF is a ratio of integers; the only allowed gap is final rounding
    return {wnodf_dev <= 1e-12 && hits >= 95 && elapsed < 120.0,
            fmt::format("WNODF max |dev| {:.1e} over {} matrices; Q optimal on {}/100; {:.2f} s", wnodf_dev, wnodf_cases,
                        hits, elapsed)};
}

Outcome scale_invariance() {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(5, seed));
        auto n = gen::random_network(rng, gen::integer(rng, 2, 11), gen::integer(rng, 2, 16));
        double c = 1000.0 * (1.0 - uniform01(rng));  // (0, 1000]
        auto s = n.scaled(c);
        auto a = network_stats(n), b = network_stats(s);
        for (auto [x, y] : {std::pair{a.web_asymmetry, b.web_asymmetry}, {a.modularity, b.modularity},
                            {a.weighted_nestedness, b.weighted_nestedness},
                            {a.interaction_asymmetry, b.interaction_asymmetry},
                            {a.weighted_connectance, b.weighted_connectance}})
            worst = std::max(worst, std::abs(x - y));
        auto na = node_stats(n), nb = node_stats(s);
        for (std::size_t i = 0; i < na.size(); ++i) {
            worst = std::max(worst, std::abs(na[i].push_pull - nb[i].push_pull));
            worst = std::max(worst, std::abs(na[i].nested_rank - nb[i].nested_rank));
        }
    }
    return {worst <= 1e-12, fmt::format("max |change| {:.1e} over 100 networks", worst)};
}

Outcome hosvd_checks() {
    auto t0 = Clock::now();
    double rec = 0, orth = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(derive_seed(6, seed));
        auto x = gen::tensor(rng, {11, 16, 64});
        auto r = hosvd(x);
        auto y = reconstruct(r);
        double diff = 0;
        for (std::size_t i = 0; i < x.size(); ++i) diff += std::pow(y.data()[i] - x.data()[i], 2);
        rec = std::max(rec, std::sqrt(diff) / x.norm());
        for (int mode = 1; mode <= 3; ++mode) {
            Eigen::MatrixXd c = unfold(r.core, mode);
            Eigen::MatrixXd gram = c * c.transpose();
            double scale = gram.diagonal().maxCoeff();
            gram.diagonal().setZero();
            orth = std::max(orth, gram.cwiseAbs().maxCoeff() / scale);
        }
    }
    double planted = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(derive_seed(7, seed));
        std::array<Eigen::VectorXd, 3> v{Eigen::VectorXd(11), Eigen::VectorXd(16), Eigen::VectorXd(64)};
        for (auto& vec : v)
            for (Eigen::Index i = 0; i < vec.size(); ++i) vec(i) = gen::real(rng, -1, 1);
        Tensor3 x({11, 16, 64});
        for (std::size_t i = 0; i < 11; ++i)
            for (std::size_t j = 0; j < 16; ++j)
                for (std::size_t k = 0; k < 64; ++k)
                    x(i, j, k) = v[0](static_cast<Eigen::Index>(i)) * v[1](static_cast<Eigen::Index>(j)) *
                                 v[2](static_cast<Eigen::Index>(k));
        auto r = hosvd(x);
        for (std::size_t n = 0; n < 3; ++n) {
            Eigen::VectorXd u = v[n].normalized();
            Eigen::Index imax;
            u.cwiseAbs().maxCoeff(&imax);
            if (u(imax) < 0) u = -u;
            planted = std::max(planted, (r.factors[n].col(0) - u).cwiseAbs().maxCoeff());
        }
    }
    double elapsed = ms_since(t0) / 1000.0;
    return {rec <= 1e-9 && orth <= 1e-9 && planted <= 1e-9 && elapsed < 10.0,
            fmt::format("reconstruction {:.1e}, core off-diagonal {:.1e}, planted factors {:.1e}, {:.2f} s", rec, orth,
                        planted, elapsed)};
}

Outcome impulse_detection() {
    auto t0 = Clock::now();
    auto tax = load_taxonomy(CESNET_SAMPLE_DATA "/taxonomy.csv");
    const std::string fc = "urban greenspace", ac = "self care";
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SynthConfig cfg;
        cfg.window = DayRange::parse("2020-01-01:2020-12-31");
        cfg.seed = derive_seed(8, seed);
        cfg.baseline_rate = 10;
        cfg.users = {100, 0.1, 0.0};
        Date start = Date::parse("2020-03-13");
        cfg.impulses.push_back({fc, ac, {start, start + 79}, 3.0, std::nullopt});
        auto counts = aggregate(generate(cfg, tax), tax, Grouping::grouped, cfg.window);
        auto t = make_tensor(counts);
        auto r = hosvd(t.values);
        auto outer = leading_outer_product(r, {t.features, t.activities, t.days}, 1, 2);
        Eigen::Index i, j;
        outer.values.cwiseAbs().maxCoeff(&i, &j);
        hits += outer.row_labels[static_cast<std::size_t>(i)] == fc && outer.col_labels[static_cast<std::size_t>(j)] == ac;
    }
    double elapsed = ms_since(t0) / 1000.0;
    return {hits >= 95 && elapsed < 120.0,
            fmt::format("impulse cell is the largest outer-product entry in {}/100 seeds, {:.1f} s", hits, elapsed)};
}

TimeSeries ar1(Rng& rng, std::size_t n, double alpha) {
    std::normal_distribution<double> z;
    TimeSeries s{Date(2020, 1, 1), {}};
    double v = z(rng) / std::sqrt(1 - alpha * alpha);
    for (std::size_t i = 0; i < n; ++i) {
        s.values.push_back(v);
        v = alpha * v + z(rng);
    }
    return s;
}

TimeSeries sinusoid(std::size_t n, double period, double shift) {
    TimeSeries s{Date(2020, 1, 1), {}};
    for (std::size_t t = 0; t < n; ++t)
        s.values.push_back(std::sin(2 * std::numbers::pi * (static_cast<double>(t) - shift) / period));
    return s;
}

Outcome wavelet_calibration() {
    const WaveletParams p;
    auto w = cwt(sinusoid(1024, 32, 0));
    auto gp = global_power(w, true);
    std::size_t arg = 0;
    for (std::size_t j = 0; j < gp.size(); ++j)
        if (std::isfinite(gp[j]) && gp[j] > gp[arg]) arg = j;
    double steps = std::abs(std::log2(w.periods[arg] / 32.0)) / p.dj;

    std::size_t hits = 0, cells = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(derive_seed(9, seed));
        auto s = cwt(ar1(rng, 512, 0.0));
        for (std::size_t j = 0; j < s.n_scales(); ++j)
            for (std::size_t t = 0; t < s.n_times(); ++t)
                if (s.in_coi(j, t)) {
                    ++cells;
                    hits += s.significant(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t));
                }
    }
    double frac = static_cast<double>(hits) / static_cast<double>(cells);

    // calibration is judged on the replicate mean; single records add sampling noise
    double sum = 0, lo = 1e300, hi = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(derive_seed(10, seed));
        double v = reconstructed_variance(cwt(ar1(rng, 2048, 0.7)), true);
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double mean = sum / 20;
    return {steps <= 1.0 && std::abs(frac - 0.05) <= 0.02 && std::abs(mean - 1.0) <= 0.05,
            fmt::format("peak {} d ({:.2f} steps from 32); white-noise significant fraction {:.4f}; "
                        "red-noise reconstructed/true variance mean {:.4f} (range {:.4f} to {:.4f})",
                        g(w.periods[arg]), steps, frac, mean, lo, hi)};
}

Outcome cross_wavelet_phase() {
    const double period = 32;
    auto x = sinusoid(1024, period, 0);
    auto same = coherence(x, x);
    double max_phase = 0, min_coh = 1;
    std::size_t region = 0;
    for (std::size_t j = 0; j < same.n_scales(); ++j)
        for (std::size_t t = 0; t < same.n_times(); ++t) {
            auto jj = static_cast<Eigen::Index>(j), tt = static_cast<Eigen::Index>(t);
            if (!same.in_coi(j, t) || !same.significant(jj, tt)) continue;
            ++region;
            max_phase = std::max(max_phase, std::abs(same.phase(jj, tt)));
            min_coh = std::min(min_coh, same.coherence(jj, tt));
        }

    auto lag = xwt(x, sinusoid(1024, period, period / 4));
    std::size_t j = 0;
    for (std::size_t k = 1; k < lag.n_scales(); ++k)
        if (std::abs(std::log(lag.periods[k] / period)) < std::abs(std::log(lag.periods[j] / period))) j = k;
    double lag_dev = 0;
    std::size_t lag_points = 0;
    for (std::size_t t = 0; t < lag.n_times(); ++t) {
        auto jj = static_cast<Eigen::Index>(j), tt = static_cast<Eigen::Index>(t);
        if (!lag.in_coi(j, t) || !lag.significant(jj, tt)) continue;
        ++lag_points;
        lag_dev = std::max(lag_dev, std::abs(std::remainder(lag.phase(jj, tt) - std::numbers::pi / 2, 2 * std::numbers::pi)));
    }
    return {region > 0 && max_phase < 0.1 && min_coh > 0.95 && lag_points > 0 && lag_dev <= 0.1,
            fmt::format("identical: {} cells, max |phase| {:.1e}, min coherence {:.4f}; quarter lag at {} d: "
                        "max |phase - pi/2| {:.1e} over {} times",
                        region, max_phase, min_coh, g(lag.periods[j]), lag_dev, lag_points)};
}

Outcome turnover_exactness() {
    auto tax = gen::small_taxonomy();
    auto rec = [](const char* d, const char* u) { return EventRecord{Date::parse(d), "park", "relaxing", u, 1}; };
    std::vector<EventRecord> fixture{rec("2020-01-01", "u1"), rec("2020-01-01", "u2"), rec("2020-01-02", "u2"),
                                     rec("2020-01-02", "u3")};
    auto s = new_user_ratio(fixture, tax, TurnoverScope::global(), DayRange::parse("2020-01-01:2020-01-02"),
                            DayRange{Date(2020, 1, 1), Date(2019, 12, 31)});
    bool fixtures = s.ratio[0] == 1.0 && s.ratio[1] == 0.5;

    std::vector<EventRecord> second{rec("2020-01-01", "a"), rec("2020-01-01", "b"), rec("2020-01-01", "c"),
                                    rec("2020-01-02", "a"), rec("2020-01-02", "d"), rec("2020-01-03", "a")};
    auto s2 = new_user_ratio(second, tax, TurnoverScope::global(), DayRange::parse("2020-01-02:2020-01-04"),
                             DayRange::parse("2020-01-01:2020-01-01"));
    fixtures = fixtures && s2.ratio[0] == 0.5 && s2.ratio[1] == 0.0 && !s2.ratio[2];

    auto big = load_taxonomy(CESNET_SAMPLE_DATA "/taxonomy.csv");
    SynthConfig cfg;
    cfg.window = DayRange::parse("2019-01-01:2020-12-31");
    cfg.seed = 11;
    cfg.baseline_rate = 1;
    cfg.users = {2000, 0.05, 0.01};
    cfg.cells.push_back({"urban greenspace", "self care", 20.0, std::nullopt, std::nullopt, std::nullopt});
    DayRange impulse = DayRange::parse("2020-03-13:2020-05-31");
    cfg.impulses.push_back({"urban greenspace", "self care", impulse, 3.0, 0.5});
    auto recs = generate(cfg, big);
    auto window = DayRange::parse("2020-01-01:2020-12-31");
    auto series = new_user_ratio(recs, big, TurnoverScope::global(), window, default_warmup(recs, window));
    std::size_t arg = 0;
    for (std::size_t d = 0; d < series.ratio.size(); ++d)
        if (series.ratio[d] && (!series.ratio[arg] || *series.ratio[d] > *series.ratio[arg])) arg = d;
    bool spike = impulse.contains(window.at(arg));
    return {fixtures && spike, fmt::format("fixtures {}; ratio maximum {:.3f} on {} (impulse {})",
                                           fixtures ? "exact" : "mismatch", *series.ratio[arg], window.at(arg).iso(),
                                           impulse.str())};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    return out;
}

Outcome determinism(const std::string& cli) {
    const fs::path root = fs::temp_directory_path() / fmt::format("cesnet_acceptance_{}", ::getpid());
    fs::remove_all(root);
    fs::create_directories(root);
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);

    {
        std::ofstream cfg(root / "synth.json");
        cfg << R"({"window": "2019-07-01:2020-12-31", "seed": 5, "baseline_rate": 1.5, "amplitude": 0.3,
                   "impulses": [{"feature_class": "urban greenspace", "activity_class": "self care",
                                 "window": "2020-03-13:2020-05-31", "factor": 3, "newcomer_fraction": 0.5}],
                   "users": {"initial_pool": 500, "daily_activity": 0.1, "newcomer_fraction": 0.02}})";
    }
    const std::string tax = CESNET_SAMPLE_DATA "/taxonomy.csv";
    const std::string str = CESNET_SAMPLE_DATA "/stringency_sample.csv";
    const std::string events = (root / "events" / "events.csv").string();
    const std::string common = fmt::format("--events {} --taxonomy {}", events, tax);
    const std::string window = "--window 2020-01-01:2020-12-31";

    std::vector<std::pair<std::string, std::string>> commands{
        {"synth", fmt::format("synth --config {} --taxonomy {}", (root / "synth.json").string(), tax)},
        {"ingest", fmt::format("ingest {} --grouping grouped", common)},
        {"build-network", fmt::format("build-network {} {} --svg", common, window)},
        {"build-network-users", fmt::format("build-network {} {} --users", common, window)},
        {"network-stats", fmt::format("network-stats {} {} --seed 3", common, window)},
        {"node-stats", fmt::format("node-stats {} {} --grouping full", common, window)},
        {"hosvd", fmt::format("hosvd {} {} --svg", common, window)},
        {"wavelet", fmt::format("wavelet {} --log1p --svg", common)},
        {"xwt", fmt::format("xwt {} {} --stringency {} --surrogates 20 --seed 4", common, window, str)},
        {"turnover", fmt::format("turnover {} {} --scope both --pair 'urban greenspace|self care'", common, window)},
        {"stringency", fmt::format("stringency --stringency {} {}", str, window)},
        {"pipeline", fmt::format("pipeline {} --stringency {} --restarts 5 --seed 9", common, str)},
    };

    std::vector<std::string> failures;
    std::size_t files = 0;
    for (const auto& [name, args] : commands) {
        std::map<std::string, std::string> runs[2];
        for (int rep = 0; rep < 2; ++rep) {
            fs::path out = name == "synth" && rep == 0 ? root / "events" : root / fmt::format("{}_{}", name, rep);
            std::string cmd = fmt::format("'{}' {} --out '{}' > '{}' 2>&1", cli, args, out.string(),
                                          (root / fmt::format("{}_{}.log", name, rep)).string());
            if (std::system(cmd.c_str()) != 0) {
                failures.push_back(name + " (exit status)");
                break;
            }
            runs[rep] = snapshot(out);
        }
        if (runs[0].empty() || runs[0] != runs[1]) {
            if (failures.empty() || failures.back().rfind(name, 0) != 0) failures.push_back(name);
        }
        files += runs[0].size();
    }
    ::unsetenv("SOURCE_DATE_EPOCH");
    if (failures.empty()) fs::remove_all(root);
    std::string detail = fmt::format("{} commands, {} files compared byte for byte", commands.size(), files);
    for (const auto& f : failures) detail += "; differs: " + f;
    if (!failures.empty()) detail += fmt::format(" (logs in {})", root.string());
    return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cesnet_acceptance <cesnet executable>\n";
        return 2;
    }
    const std::string cli = argv[1];
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> criteria{
        {1, "web asymmetry exact", web_asymmetry_exact},
        {2, "nested rank grid", nested_rank_grid},
        {3, "metric oracle equivalence", oracle_equivalence},
        {4, "scale invariance", scale_invariance},
        {5, "HOSVD reconstruction and orthogonality", hosvd_checks},
        {6, "impulse detection", impulse_detection},
        {7, "wavelet calibration", wavelet_calibration},
        {8, "cross-wavelet phase", cross_wavelet_phase},
        {9, "turnover exactness", turnover_exactness},
        {10, "determinism", [&] { return determinism(cli); }},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        failed += !o.pass;
        std::cout << fmt::format("{} [{:>2}] {}: {} ({:.2f} s)", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail,
                                 ms_since(t0) / 1000.0)
                  << std::endl;
    }
    std::cout << fmt::format("{} of {} criteria passed", criteria.size() - static_cast<std::size_t>(failed),
                             criteria.size())
              << std::endl;
    return failed == 0 ? 0 : 1;
}
