#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cesnet/csv.hpp"
#include "cesnet/error.hpp"
#include "cesnet/exogenous.hpp"
#include "cesnet/ingest.hpp"
#include "cesnet/labeled_matrix.hpp"
#include "cesnet/manifest.hpp"
#include "cesnet/network.hpp"
#include "cesnet/series.hpp"
#include "cesnet/spectral.hpp"
#include "cesnet/svg.hpp"
#include "cesnet/synth.hpp"
#include "cesnet/tensor.hpp"
#include "cesnet/turnover.hpp"

namespace cesnet::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Output directory plus the manifest that goes with it.
class Run {
public:
    Run(const Options& o, std::string command) : dir_(o.out) {
        fs::create_directories(dir_);
        manifest_.command = std::move(command);
        manifest_.parameters = o.given;
        manifest_.started_at = timestamp_now();
    }

    void input(const std::string& path) {
        if (!path.empty()) manifest_.inputs.push_back({path, sha256_file(path)});
    }
    void seed(std::uint64_t s) { manifest_.seed = s; }

    std::ofstream open(const std::string& name) {
        outputs_.push_back(name);
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw InputError(fmt::format("cannot write {}", (dir_ / name).string()));
        return out;
    }
    void write(const std::string& name, const std::string& text) { open(name) << text; }

    int finish() {
        write_manifest(dir_, manifest_, outputs_);
        return 0;
    }

private:
    fs::path dir_;
    RunManifest manifest_;
    std::vector<std::string> outputs_;
};

struct Loaded {
    Taxonomy taxonomy;
    std::vector<EventRecord> records;
    std::vector<ParseIssue> skipped;
    DayRange window;
};

Loaded load(const Options& o, Run& run) {
    if (o.events.empty() || o.taxonomy.empty()) throw InputError("--events and --taxonomy are required");
    run.input(o.taxonomy);
    run.input(o.events);
    Loaded l;
    l.taxonomy = load_taxonomy(o.taxonomy);
    auto parsed = parse_events(o.events, l.taxonomy, o.policy == "strict" ? RowPolicy::strict : RowPolicy::skip);
    for (const auto& issue : parsed.skipped)
        std::cerr << fmt::format("warning: {} line {}: {}\n", o.events, issue.line, issue.message);
    l.records = std::move(parsed.records);
    l.skipped = std::move(parsed.skipped);
    if (!o.window.empty()) {
        l.window = DayRange::parse(o.window);
    } else {
        if (l.records.empty()) throw InputError("no valid records and no --window given");
        auto [lo, hi] = std::minmax_element(l.records.begin(), l.records.end(),
                                            [](const auto& a, const auto& b) { return a.date < b.date; });
        l.window = {lo->date, hi->date};
    }
    return l;
}

Grouping grouping(const Options& o) { return parse_grouping(o.grouping); }

BipartiteNetwork network_for(const Options& o, const Loaded& l) {
    if (o.users) return user_network(l.records, l.taxonomy, grouping(o), l.window);
    return build_network(aggregate(l.records, l.taxonomy, grouping(o), l.window), l.window);
}

json stats_json(const NetworkStats& s) {
    return {{"n_features", s.n_features},
            {"n_activities", s.n_activities},
            {"total_weight", s.total_weight},
            {"web_asymmetry", s.web_asymmetry},
            {"modularity", s.modularity},
            {"n_modules", s.n_modules},
            {"weighted_nestedness", s.weighted_nestedness},
            {"interaction_asymmetry", s.interaction_asymmetry},
            {"weighted_connectance", s.weighted_connectance}};
}

std::pair<std::string, std::string> split_pair(const std::string& text) {
    auto bar = text.find('|');
    if (bar == std::string::npos) throw InputError(fmt::format("class pair '{}' must be 'feature|activity'", text));
    return {csv::lower(csv::trim(text.substr(0, bar))), csv::lower(csv::trim(text.substr(bar + 1)))};
}

WaveletParams wavelet_params(const Options& o) {
    WaveletParams p;
    p.omega0 = o.omega0;
    p.s0 = o.s0;
    p.dj = o.dj;
    p.significance_level = o.alpha;
    return p;
}

// Daily series for spectral commands: a date,value file, one grouped cell,
// or the total over all cells.
TimeSeries daily_series(const Options& o, Run& run) {
    TimeSeries s;
    if (!o.series.empty()) {
        run.input(o.series);
        std::ifstream in(o.series);
        if (!in) throw InputError(fmt::format("cannot open {}", o.series));
        s = read_series_csv(in);
        if (!o.window.empty()) s = s.slice(DayRange::parse(o.window).intersect(s.range()));
    } else {
        auto l = load(o, run);
        if (!o.cell.empty()) {
            auto [fc, ac] = split_pair(o.cell);
            auto counts = aggregate(l.records, l.taxonomy, Grouping::grouped, l.window);
            auto cs = counts.cell_series(l.taxonomy.class_index(NodeKind::feature, fc),
                                         l.taxonomy.class_index(NodeKind::activity, ac));
            s = to_series(l.window.first, cs);
        } else {
            auto totals = aggregate(l.records, l.taxonomy, Grouping::grouped, l.window).daily_totals();
            s = to_series(l.window.first, totals);
        }
    }
    return o.log1p ? log1p(s) : s;
}

std::string flag(bool b) { return b ? "1" : "0"; }

json peaks_json(const WaveletSpectrum& w) {
    auto g = global_power(w, true);
    json peaks = json::array();
    for (std::size_t j = 1; j + 1 < g.size(); ++j)
        if (std::isfinite(g[j]) && std::isfinite(g[j - 1]) && g[j] > g[j - 1] &&
            !(std::isfinite(g[j + 1]) && g[j + 1] > g[j]))
            peaks.push_back({{"period", w.periods[j]}, {"power", g[j]}});
    return peaks;
}

double significant_fraction(const WaveletSpectrum& w) {
    std::size_t sig = 0, total = 0;
    for (std::size_t j = 0; j < w.n_scales(); ++j)
        for (std::size_t t = 0; t < w.n_times(); ++t)
            if (w.in_coi(j, t)) {
                ++total;
                sig += w.significant(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) ? 1 : 0;
            }
    return total ? static_cast<double>(sig) / static_cast<double>(total) : 0.0;
}

StringencySeries load_stringency(const Options& o, Run& run) {
    run.input(o.stringency);
    auto table = load_stringency_table(o.stringency);
    return median_stringency(table, o.countries.empty() ? default_countries() : o.countries);
}

LabeledMatrix factor_matrix(const Eigen::MatrixXd& u, const std::vector<std::string>& labels, const char* corner) {
    LabeledMatrix m{corner, labels, {}, u};
    for (Eigen::Index c = 0; c < u.cols(); ++c) m.col_labels.push_back(fmt::format("{}", c + 1));
    return m;
}

std::string matrix_csv(const LabeledMatrix& m) {
    std::ostringstream ss;
    write_matrix_csv(ss, m);
    return ss.str();
}

}  // namespace

int run_ingest(const Options& o) {
    Run run(o, "ingest");
    auto l = load(o, run);
    auto counts = aggregate(l.records, l.taxonomy, grouping(o), l.window);
    {
        auto out = run.open("events.csv");
        write_events_csv(out, l.records);
    }
    {
        auto out = run.open("daily_counts.csv");
        out << "date,feature,activity,count\n";
        for (std::size_t d = 0; d < counts.n_days(); ++d)
            for (std::size_t a = 0; a < counts.n_activities(); ++a)
                for (std::size_t f = 0; f < counts.n_features(); ++f)
                    if (auto c = counts.at(f, a, d))
                        out << counts.window().at(d).iso() << ',' << csv::escape(counts.features()[f]) << ','
                            << csv::escape(counts.activities()[a]) << ',' << c << '\n';
    }
    {
        auto out = run.open("daily_totals.csv");
        write_series_csv(out, to_series(l.window.first, counts.daily_totals()), "count");
    }
    {
        auto out = run.open("skipped.csv");
        out << "line,message\n";
        for (const auto& s : l.skipped) out << s.line << ',' << csv::escape(s.message) << '\n';
    }
    std::cout << fmt::format("{} records, {} skipped, {} in window {}\n", l.records.size(), l.skipped.size(),
                             counts.total(), l.window.str());
    return run.finish();
}

int run_build_network(const Options& o) {
    Run run(o, "build-network");
    auto l = load(o, run);
    auto net = network_for(o, l);
    run.write("network.csv", matrix_csv(net.to_matrix()));
    if (o.svg) run.write("network.svg", heatmap_svg(net.to_matrix(), fmt::format("weights {}", l.window.str())));
    return run.finish();
}

int run_network_stats(const Options& o) {
    Run run(o, "network-stats");
    run.seed(o.seed);
    auto l = load(o, run);
    auto net = network_for(o, l).active();
    ModularityOptions mo{o.restarts, o.seed};
    auto stats = network_stats(net, mo);
    json j = {{"window", l.window.str()},
              {"grouping", o.grouping},
              {"weighting", o.users ? "users" : "events"},
              {"restarts", o.restarts},
              {"seed", o.seed}};
    j.update(stats_json(stats));
    run.write("network_stats.json", j.dump(2) + "\n");

    auto mod = bipartite_modularity(net, mo);
    auto out = run.open("modules.csv");
    out << "kind,label,module\n";
    for (std::size_t f = 0; f < net.n_features(); ++f)
        out << "feature," << csv::escape(net.features()[f]) << ',' << mod.feature_modules[f] << '\n';
    for (std::size_t a = 0; a < net.n_activities(); ++a)
        out << "activity," << csv::escape(net.activities()[a]) << ',' << mod.activity_modules[a] << '\n';
    out.close();
    return run.finish();
}

int run_node_stats(const Options& o) {
    Run run(o, "node-stats");
    auto l = load(o, run);
    auto out = run.open("node_stats.csv");
    out << "kind,label,push_pull,nested_rank\n";
    for (const auto& n : node_stats(network_for(o, l)))
        out << to_string(n.kind) << ',' << csv::escape(n.label) << ',' << format_number(n.push_pull) << ','
            << format_number(n.nested_rank) << '\n';
    out.close();
    return run.finish();
}

int run_hosvd(const Options& o) {
    Run run(o, "hosvd");
    auto l = load(o, run);
    auto t = make_tensor(aggregate(l.records, l.taxonomy, grouping(o), l.window), {o.center, o.normalize_days});
    std::optional<Tensor3::Dims> ranks;
    if (!o.ranks.empty()) {
        auto parts = csv::split(o.ranks);
        if (parts.size() != 3) throw InputError("--ranks needs three comma-separated values");
        Tensor3::Dims r{};
        for (std::size_t i = 0; i < 3; ++i) {
            try {
                r[i] = static_cast<std::size_t>(std::stoul(parts[i]));
            } catch (const std::exception&) {
                throw InputError(fmt::format("bad rank '{}'", parts[i]));
            }
        }
        ranks = r;
    }
    auto h = hosvd(t.values, ranks);
    std::array<std::vector<std::string>, 3> labels{t.features, t.activities, t.days};

    run.write("factor_features.csv", matrix_csv(factor_matrix(h.factors[0], t.features, "feature")));
    run.write("factor_activities.csv", matrix_csv(factor_matrix(h.factors[1], t.activities, "activity")));
    run.write("factor_days.csv", matrix_csv(factor_matrix(h.factors[2], t.days, "date")));
    {
        auto out = run.open("singular_values.csv");
        out << "mode,index,value\n";
        for (std::size_t m = 0; m < 3; ++m)
            for (Eigen::Index i = 0; i < h.singular_values[m].size(); ++i)
                out << m + 1 << ',' << i + 1 << ',' << format_number(h.singular_values[m](i)) << '\n';
    }
    auto fa = leading_outer_product(h, labels, 1, 2);
    run.write("outer_feature_activity.csv", matrix_csv(fa));
    run.write("outer_feature_date.csv", matrix_csv(leading_outer_product(h, labels, 1, 3)));
    run.write("outer_activity_date.csv", matrix_csv(leading_outer_product(h, labels, 2, 3)));
    if (o.svg) run.write("outer_feature_activity.svg", heatmap_svg(fa, "leading feature x activity outer product"));
    if (h.degenerate) std::cerr << "warning: all-zero tensor, factors are identity\n";
    return run.finish();
}

int run_wavelet(const Options& o) {
    Run run(o, "wavelet");
    auto s = daily_series(o, run);
    auto w = cwt(s, wavelet_params(o));
    {
        auto out = run.open("wavelet.csv");
        out << "date,period,power,significant,in_coi\n";
        for (std::size_t t = 0; t < w.n_times(); ++t)
            for (std::size_t j = 0; j < w.n_scales(); ++j) {
                auto jj = static_cast<Eigen::Index>(j), tt = static_cast<Eigen::Index>(t);
                out << s.date(t).iso() << ',' << format_number(w.periods[j]) << ',' << format_number(w.power(jj, tt))
                    << ',' << flag(w.significant(jj, tt)) << ',' << flag(w.in_coi(j, t)) << '\n';
            }
    }
    {
        auto sig = significance(w, o.alpha);
        auto all = global_power(w, false), inside = global_power(w, true);
        auto out = run.open("global_power.csv");
        out << "period,power,coi_power,background,threshold\n";
        for (std::size_t j = 0; j < w.n_scales(); ++j)
            out << format_number(w.periods[j]) << ',' << format_number(all[j]) << ','
                << (std::isfinite(inside[j]) ? format_number(inside[j]) : "") << ','
                << format_number(w.signal_variance * w.background[j]) << ',' << format_number(sig.threshold[j])
                << '\n';
    }
    {
        auto out = run.open("ridges.csv");
        out << "ridge,date,period,power\n";
        auto rs = ridges(w);
        for (std::size_t r = 0; r < rs.size(); ++r)
            for (const auto& p : rs[r])
                out << r + 1 << ',' << s.date(p.time).iso() << ',' << format_number(w.periods[p.scale]) << ','
                    << format_number(w.power(static_cast<Eigen::Index>(p.scale), static_cast<Eigen::Index>(p.time)))
                    << '\n';
    }
    json summary = {{"start", s.start.iso()},
                    {"days", s.size()},
                    {"mean", w.input_mean},
                    {"variance", w.input_variance},
                    {"lag1", w.lag1},
                    {"significant_fraction", significant_fraction(w)},
                    {"peaks", peaks_json(w)}};
    run.write("wavelet.json", summary.dump(2) + "\n");
    if (o.svg)
        run.write("wavelet.svg",
                  spectrogram_svg(w.power, w.periods, w.coi, w.significant, {}, "wavelet power"));
    return run.finish();
}

int run_xwt(const Options& o) {
    Run run(o, "xwt");
    run.seed(o.seed);
    auto x = daily_series(o, run);
    auto str = load_stringency(o, run);
    auto pair = align(str, x, o.window.empty() ? x.range() : DayRange::parse(o.window));
    auto params = wavelet_params(o);
    auto c = coherence(pair.y, pair.stringency, params);
    {
        auto out = run.open("xwt.csv");
        out << "date,period,power,phase,coherence,significant,in_coi\n";
        for (std::size_t t = 0; t < c.n_times(); ++t)
            for (std::size_t j = 0; j < c.n_scales(); ++j) {
                auto jj = static_cast<Eigen::Index>(j), tt = static_cast<Eigen::Index>(t);
                out << pair.y.date(t).iso() << ',' << format_number(c.periods[j]) << ','
                    << format_number(c.power(jj, tt)) << ',' << format_number(c.phase(jj, tt)) << ','
                    << format_number(c.coherence(jj, tt)) << ',' << flag(c.significant(jj, tt)) << ','
                    << flag(c.in_coi(j, t)) << '\n';
            }
    }
    if (o.surrogates > 0) {
        auto th = coherence_thresholds(c, o.alpha, o.surrogates, o.seed);
        auto out = run.open("coherence_significance.csv");
        out << "period,threshold\n";
        for (std::size_t j = 0; j < th.size(); ++j)
            out << format_number(c.periods[j]) << ',' << (std::isfinite(th[j]) ? format_number(th[j]) : "") << '\n';
    }
    {
        auto out = run.open("stringency.csv");
        write_series_csv(out, pair.stringency, "stringency");
    }
    if (o.svg)
        run.write("xwt.svg", spectrogram_svg(c.coherence, c.periods, c.coi, c.significant, c.phase,
                                             "wavelet coherence with stringency"));
    return run.finish();
}

int run_turnover(const Options& o) {
    Run run(o, "turnover");
    auto l = load(o, run);
    DayRange warmup = o.warmup.empty() ? default_warmup(l.records, l.window) : DayRange::parse(o.warmup);
    std::vector<TurnoverSeries> out;
    if (o.scope == "all" || o.scope == "both")
        out.push_back(new_user_ratio(l.records, l.taxonomy, TurnoverScope::global(), l.window, warmup));
    if (o.scope == "pair" || o.scope == "both") {
        if (o.pairs.empty()) throw InputError("pair scope needs at least one --pair");
        for (const auto& p : o.pairs) {
            auto [fc, ac] = split_pair(p);
            out.push_back(new_user_ratio(l.records, l.taxonomy, TurnoverScope::pair(fc, ac), l.window, warmup));
        }
    }
    auto f = run.open("turnover.csv");
    write_turnover_csv(f, out);
    f.close();
    return run.finish();
}

int run_stringency(const Options& o) {
    Run run(o, "stringency");
    auto s = load_stringency(o, run);
    auto filled = fill_stringency(s, o.window.empty() ? s.series.range() : DayRange::parse(o.window));
    auto out = run.open("stringency.csv");
    write_series_csv(out, filled, "stringency");
    out.close();
    std::cout << fmt::format("median of {} over {}\n", fmt::join(s.countries, ","), filled.range().str());
    return run.finish();
}

int run_synth(const Options& o) {
    Run run(o, "synth");
    run.input(o.config);
    auto cfg = load_synth_config(o.config);
    if (o.given.contains("seed")) cfg.seed = o.seed;
    run.seed(cfg.seed);
    std::string tax_path = !o.taxonomy.empty() ? o.taxonomy : cfg.taxonomy ? cfg.taxonomy->string() : "";
    if (tax_path.empty()) throw InputError("synth needs a taxonomy (config key or --taxonomy)");
    run.input(tax_path);
    auto events = generate(cfg, load_taxonomy(tax_path));
    auto out = run.open("events.csv");
    write_events_csv(out, events);
    out.close();
    std::cout << fmt::format("{} events over {}\n", events.size(), cfg.window.str());
    return run.finish();
}

int run_pipeline(const Options& o) {
    Run run(o, "pipeline");
    run.seed(o.seed);
    auto l = load(o, run);
    const ModularityOptions mo{o.restarts, o.seed};
    json summary = {{"window", l.window.str()}, {"records", l.records.size()}, {"seed", o.seed}};

    // global statistics per calendar year and over the whole window
    json stats;
    for (auto g : {Grouping::grouped, Grouping::full}) {
        auto counts = aggregate(l.records, l.taxonomy, g, l.window);
        json blocks;
        auto block = [&](const DayRange& r) -> json {
            try {
                return stats_json(network_stats(build_network(counts, r).active(), mo));
            } catch (const InputError& e) {
                return {{"error", e.what()}};
            }
        };
        for (int y = l.window.first.year(); y <= l.window.last.year(); ++y) {
            auto r = DayRange::year(y).intersect(l.window);
            blocks[std::to_string(y)] = block(r);
        }
        blocks["all_years"] = block(l.window);
        stats[std::string(to_string(g))] = blocks;
    }
    summary["network_stats"] = stats;

    // leading outer products of the grouped tensor
    auto grouped = aggregate(l.records, l.taxonomy, Grouping::grouped, l.window);
    auto tensor = make_tensor(grouped);
    auto h = hosvd(tensor.values);
    std::array<std::vector<std::string>, 3> labels{tensor.features, tensor.activities, tensor.days};
    auto fa = leading_outer_product(h, labels, 1, 2);
    run.write("outer_feature_activity.csv", matrix_csv(fa));
    {
        Eigen::Index r = 0, c = 0;
        fa.values.cwiseAbs().maxCoeff(&r, &c);
        summary["hosvd"] = {{"degenerate", h.degenerate},
                            {"max_cell",
                             {{"feature", fa.row_labels[static_cast<std::size_t>(r)]},
                              {"activity", fa.col_labels[static_cast<std::size_t>(c)]},
                              {"value", fa.values(r, c)}}}};
    }

    // spectrum of the daily total
    auto total = to_series(l.window.first, grouped.daily_totals());
    if (o.log1p) total = log1p(total);
    WaveletParams params;
    params.significance_level = o.alpha;
    json spectral;
    if (total.size() >= 8) {
        auto w = cwt(total, params);
        spectral = {{"lag1", w.lag1}, {"significant_fraction", significant_fraction(w)}, {"peaks", peaks_json(w)}};
        if (!o.stringency.empty()) {
            auto pair = align(load_stringency(o, run), total, l.window);
            auto c = coherence(pair.y, pair.stringency, params);
            double sum = 0;
            std::size_t n = 0, sig = 0;
            for (std::size_t j = 0; j < c.n_scales(); ++j)
                for (std::size_t t = 0; t < c.n_times(); ++t)
                    if (c.in_coi(j, t)) {
                        auto jj = static_cast<Eigen::Index>(j), tt = static_cast<Eigen::Index>(t);
                        sum += c.coherence(jj, tt);
                        sig += c.significant(jj, tt) ? 1 : 0;
                        ++n;
                    }
            spectral["stringency"] = {{"days", pair.y.size()},
                                      {"mean_coherence", n ? sum / static_cast<double>(n) : 0.0},
                                      {"significant_fraction", n ? static_cast<double>(sig) / static_cast<double>(n)
                                                                 : 0.0}};
        }
    } else {
        spectral = {{"error", "window shorter than 8 days"}};
    }
    summary["spectral"] = spectral;

    // turnover
    std::vector<TurnoverSeries> series;
    auto warmup = default_warmup(l.records, l.window);
    series.push_back(new_user_ratio(l.records, l.taxonomy, TurnoverScope::global(), l.window, warmup));
    for (const auto& p : o.pairs) {
        auto [fc, ac] = split_pair(p);
        series.push_back(new_user_ratio(l.records, l.taxonomy, TurnoverScope::pair(fc, ac), l.window, warmup));
    }
    json turnover = json::object();
    for (const auto& s : series) {
        double sum = 0, best = -1;
        std::size_t n = 0, arg = 0;
        for (std::size_t d = 0; d < s.ratio.size(); ++d)
            if (s.ratio[d]) {
                sum += *s.ratio[d];
                ++n;
                if (*s.ratio[d] > best) best = *s.ratio[d], arg = d;
            }
        turnover[s.scope] = n ? json{{"mean_ratio", sum / static_cast<double>(n)},
                                     {"max_ratio", best},
                                     {"max_date", s.window.at(arg).iso()}}
                              : json{{"mean_ratio", nullptr}};
    }
    summary["turnover"] = turnover;
    {
        auto out = run.open("turnover.csv");
        write_turnover_csv(out, series);
    }
    run.write("summary.json", summary.dump(2) + "\n");
    return run.finish();
}

}  // namespace cesnet::cli
