#include "cesnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include <fmt/format.h>

#include "cesnet/error.hpp"
#include "cesnet/random.hpp"

namespace cesnet {

namespace {

// Relative tolerance for comparing marginal totals that are equal in exact
// arithmetic but were summed in a different order.
constexpr double kTotalsRelTol = 1e-12;

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= kTotalsRelTol * std::max(std::abs(a), std::abs(b));
}

void check_unique(const std::vector<std::string>& labels, std::string_view what) {
    std::unordered_set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second) throw InputError(fmt::format("duplicate {} label '{}'", what, l));
}

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

BipartiteNetwork require_active(const BipartiteNetwork& net) {
    auto a = net.active();
    if (a.n_features() == 0 || a.n_activities() == 0) throw InputError("network has no links");
    return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// BipartiteNetwork

BipartiteNetwork::BipartiteNetwork(std::vector<std::string> features, std::vector<std::string> activities,
                                   Eigen::MatrixXd weights)
    : features_(std::move(features)), activities_(std::move(activities)), w_(std::move(weights)) {
    if (w_.rows() != idx(features_.size()) || w_.cols() != idx(activities_.size()))
        throw InputError(fmt::format("weight matrix is {}x{} but there are {} features and {} activities",
                                     w_.rows(), w_.cols(), features_.size(), activities_.size()));
    check_unique(features_, "feature");
    check_unique(activities_, "activity");
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
        double v = w_.data()[i];
        if (!std::isfinite(v) || v < 0) throw InputError("network weights must be finite and nonnegative");
    }
}

BipartiteNetwork BipartiteNetwork::from_matrix(const LabeledMatrix& m) {
    return BipartiteNetwork(m.row_labels, m.col_labels, m.values);
}

LabeledMatrix BipartiteNetwork::to_matrix() const { return {"feature", features_, activities_, w_}; }

BipartiteNetwork BipartiteNetwork::active() const {
    Eigen::VectorXd rt = feature_totals(), ct = activity_totals();
    std::vector<Eigen::Index> rows, cols;
    std::vector<std::string> fl, al;
    for (Eigen::Index i = 0; i < rt.size(); ++i)
        if (rt(i) > 0) {
            rows.push_back(i);
            fl.push_back(features_[static_cast<std::size_t>(i)]);
        }
    for (Eigen::Index j = 0; j < ct.size(); ++j)
        if (ct(j) > 0) {
            cols.push_back(j);
            al.push_back(activities_[static_cast<std::size_t>(j)]);
        }
    Eigen::MatrixXd w(idx(rows.size()), idx(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) w(idx(i), idx(j)) = w_(rows[i], cols[j]);
    return BipartiteNetwork(std::move(fl), std::move(al), std::move(w));
}

bool BipartiteNetwork::is_active() const {
    return (feature_totals().array() > 0).all() && (activity_totals().array() > 0).all();
}

BipartiteNetwork BipartiteNetwork::scaled(double c) const {
    return BipartiteNetwork(features_, activities_, w_ * c);
}

BipartiteNetwork build_network(const DailyCounts& counts, const DayRange& range) {
    if (range.empty()) throw InputError("empty day range");
    const auto& win = counts.window();
    if (!win.contains(range.first) || !win.contains(range.last))
        throw InputError(fmt::format("range {} is outside the counts window {}", range.str(), win.str()));
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(idx(counts.n_features()), idx(counts.n_activities()));
    for (std::size_t d = win.index(range.first); d <= win.index(range.last); ++d)
        for (std::size_t a = 0; a < counts.n_activities(); ++a)
            for (std::size_t f = 0; f < counts.n_features(); ++f)
                w(idx(f), idx(a)) += static_cast<double>(counts.at(f, a, d));
    return BipartiteNetwork(counts.features(), counts.activities(), std::move(w));
}

// ---------------------------------------------------------------------------
// Global statistics

double web_asymmetry(const BipartiteNetwork& net) {
    auto a = require_active(net);
    double F = static_cast<double>(a.n_features()), A = static_cast<double>(a.n_activities());
    return (A - F) / (A + F);
}

namespace {

// Sum over vectors v (rows or columns) of total(v) * 2^H(v), H in bits.
template <typename Lines>
double effective_partner_mass(const Lines& lines) {
    double acc = 0.0;
    for (const auto& line : lines) {
        double t = line.sum();
        if (t <= 0) continue;
        double h = 0.0;
        for (Eigen::Index k = 0; k < line.size(); ++k) {
            double p = line(k) / t;
            if (p > 0) h -= p * std::log2(p);
        }
        acc += t * std::exp2(h);
    }
    return acc;
}

}  // namespace

double weighted_connectance(const BipartiteNetwork& net) {
    auto a = require_active(net);
    const auto& w = a.weights();
    double m = w.sum();
    double ld = (effective_partner_mass(w.rowwise()) + effective_partner_mass(w.colwise())) / (2.0 * m);
    return ld / static_cast<double>(a.n_features() + a.n_activities());
}

namespace {

// Paired overlap summed over all unordered pairs of lines. For the pair,
// the line with strictly larger total is the reference; the other scores
// the fraction of its nonzero cells strictly below the reference's cells.
template <typename Lines>
double paired_overlap_sum(const Lines& lines, const Eigen::VectorXd& totals, Eigen::Index n) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (nearly_equal(totals(i), totals(j))) continue;
            Eigen::Index hi = totals(i) > totals(j) ? i : j;
            Eigen::Index lo = hi == i ? j : i;
            auto big = lines(hi);
            auto small = lines(lo);
            int filled = 0, below = 0;
            for (Eigen::Index k = 0; k < small.size(); ++k) {
                if (small(k) > 0) {
                    ++filled;
                    if (small(k) < big(k)) ++below;
                }
            }
            if (filled > 0) sum += static_cast<double>(below) / filled;
        }
    }
    return sum;
}

}  // namespace

double weighted_nestedness(const BipartiteNetwork& net) {
    auto a = require_active(net);
    const auto& w = a.weights();
    const Eigen::Index F = w.rows(), A = w.cols();
    if (F < 2 && A < 2) throw InputError("nestedness needs at least two rows or two columns");
    double rows = paired_overlap_sum([&](Eigen::Index i) { return w.row(i); }, a.feature_totals(), F);
    double cols = paired_overlap_sum([&](Eigen::Index j) { return w.col(j); }, a.activity_totals(), A);
    double pairs = static_cast<double>(F * (F - 1) / 2 + A * (A - 1) / 2);
    return (rows + cols) / pairs;
}

double interaction_asymmetry(const BipartiteNetwork& net) {
    auto a = require_active(net);
    const auto& w = a.weights();
    Eigen::VectorXd rt = a.feature_totals(), ct = a.activity_totals();
    double sum = 0.0;
    long links = 0;
    for (Eigen::Index f = 0; f < w.rows(); ++f)
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (w(f, j) <= 0) continue;
            double fa = w(f, j) / rt(f);  // feature's dependence on the activity
            double af = w(f, j) / ct(j);
            sum += std::abs(fa - af) / std::max(fa, af);
            ++links;
        }
    return sum / static_cast<double>(links);
}

// ---------------------------------------------------------------------------
// Modularity

double bipartite_modularity_of(const BipartiteNetwork& net, const std::vector<int>& fm,
                               const std::vector<int>& am) {
    if (fm.size() != net.n_features() || am.size() != net.n_activities())
        throw InputError("partition size does not match the network");
    const auto& w = net.weights();
    double m = w.sum();
    if (m <= 0) throw InputError("modularity needs positive total weight");
    Eigen::VectorXd k = net.feature_totals(), d = net.activity_totals();
    double q = 0.0;
    for (Eigen::Index f = 0; f < w.rows(); ++f)
        for (Eigen::Index a = 0; a < w.cols(); ++a)
            if (fm[static_cast<std::size_t>(f)] == am[static_cast<std::size_t>(a)])
                q += w(f, a) - k(f) * d(a) / m;
    return q / m;
}

namespace {

constexpr double kScoreTieTol = 1e-13;

// Label propagation over a normalized modularity matrix B (Q = sum of B
// over same-label feature/activity pairs). Labels live in [0, F + A).
class LabelPropagation {
public:
    LabelPropagation(const Eigen::MatrixXd& b, Rng& rng)
        : b_(b),
          rng_(rng),
          nf_(b.rows()),
          na_(b.cols()),
          score_(static_cast<std::size_t>(nf_ + na_), 0.0),
          marked_(score_.size(), 0) {}

    void run(std::vector<int>& red, std::vector<int>& blue) {
        std::vector<Eigen::Index> rorder(static_cast<std::size_t>(nf_)), border(static_cast<std::size_t>(na_));
        std::iota(rorder.begin(), rorder.end(), 0);
        std::iota(border.begin(), border.end(), 0);
        for (int iter = 0; iter < 10000; ++iter) {
            bool changed = false;
            shuffle(border, rng_);
            for (auto a : border) changed |= update(blue, a, red, /*node_is_red=*/false);
            shuffle(rorder, rng_);
            for (auto f : rorder) changed |= update(red, f, blue, /*node_is_red=*/true);
            if (!changed) break;
        }
    }

private:
    // Moves one node to the label maximizing its modularity contribution
    // against the opposite side. Returns whether the label changed.
    bool update(std::vector<int>& mine, Eigen::Index node, const std::vector<int>& other, bool node_is_red) {
        touched_.clear();
        for (std::size_t o = 0; o < other.size(); ++o) {
            auto l = static_cast<std::size_t>(other[o]);
            double v = node_is_red ? b_(node, static_cast<Eigen::Index>(o)) : b_(static_cast<Eigen::Index>(o), node);
            if (!marked_[l]) {
                marked_[l] = 1;
                touched_.push_back(static_cast<int>(l));
            }
            score_[l] += v;
        }
        const int current = mine[static_cast<std::size_t>(node)];
        const double current_score = score_[static_cast<std::size_t>(current)];  // zero when untouched

        double best = current_score;
        for (int l : touched_) best = std::max(best, score_[static_cast<std::size_t>(l)]);
        // a label held by nobody on the other side contributes exactly zero
        int fresh = -1;
        if (best < -kScoreTieTol) {
            fresh = free_label(mine, other);
            best = 0.0;
        }

        int chosen = current;
        if (current_score < best - kScoreTieTol) {
            ties_.clear();
            for (int l : touched_)
                if (score_[static_cast<std::size_t>(l)] >= best - kScoreTieTol) ties_.push_back(l);
            if (fresh >= 0) ties_.push_back(fresh);
            std::sort(ties_.begin(), ties_.end());
            chosen = ties_[uniform_index(rng_, ties_.size())];
        }
        for (int l : touched_) {
            score_[static_cast<std::size_t>(l)] = 0.0;
            marked_[static_cast<std::size_t>(l)] = 0;
        }
        mine[static_cast<std::size_t>(node)] = chosen;
        return chosen != current;
    }

    int free_label(const std::vector<int>& a, const std::vector<int>& b) const {
        std::vector<char> used(score_.size(), 0);
        for (int l : a) used[static_cast<std::size_t>(l)] = 1;
        for (int l : b) used[static_cast<std::size_t>(l)] = 1;
        for (std::size_t l = 0; l < used.size(); ++l)
            if (!used[l]) return static_cast<int>(l);
        return -1;
    }

    const Eigen::MatrixXd& b_;
    Rng& rng_;
    Eigen::Index nf_, na_;
    std::vector<double> score_;
    std::vector<char> marked_;
    std::vector<int> touched_;
    std::vector<int> ties_;
};

double normalized_q(const Eigen::MatrixXd& b, const std::vector<int>& red, const std::vector<int>& blue) {
    double q = 0.0;
    for (Eigen::Index f = 0; f < b.rows(); ++f)
        for (Eigen::Index a = 0; a < b.cols(); ++a)
            if (red[static_cast<std::size_t>(f)] == blue[static_cast<std::size_t>(a)]) q += b(f, a);
    return q;
}

// Merges the module pair with the largest positive modularity gain.
bool merge_best_pair(const Eigen::MatrixXd& b, std::vector<int>& red, std::vector<int>& blue) {
    std::vector<int> labels(red);
    labels.insert(labels.end(), blue.begin(), blue.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    const std::size_t k = labels.size();
    if (k < 2) return false;
    auto pos = [&](int l) {
        return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) - labels.begin());
    };
    // mass[u][v]: B summed over features in u and activities in v
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (Eigen::Index f = 0; f < b.rows(); ++f)
        for (Eigen::Index a = 0; a < b.cols(); ++a)
            mass(static_cast<Eigen::Index>(pos(red[static_cast<std::size_t>(f)])),
                 static_cast<Eigen::Index>(pos(blue[static_cast<std::size_t>(a)]))) += b(f, a);
    double best = kScoreTieTol;
    int bu = -1, bv = -1;
    for (std::size_t u = 0; u < k; ++u)
        for (std::size_t v = u + 1; v < k; ++v) {
            double gain = mass(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) +
                          mass(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u));
            if (gain > best) {
                best = gain;
                bu = labels[u];
                bv = labels[v];
            }
        }
    if (bu < 0) return false;
    for (auto& l : red)
        if (l == bv) l = bu;
    for (auto& l : blue)
        if (l == bv) l = bu;
    return true;
}

// Relabels modules 0..k-1 in order of first appearance (features, then activities).
int canonicalize(std::vector<int>& red, std::vector<int>& blue) {
    std::vector<int> map;
    auto relabel = [&](int& l) {
        if (static_cast<std::size_t>(l) >= map.size()) map.resize(static_cast<std::size_t>(l) + 1, -1);
        int& m = map[static_cast<std::size_t>(l)];
        if (m < 0) m = static_cast<int>(std::count_if(map.begin(), map.end(), [](int x) { return x >= 0; }));
        l = m;
    };
    for (auto& l : red) relabel(l);
    for (auto& l : blue) relabel(l);
    return static_cast<int>(std::count_if(map.begin(), map.end(), [](int x) { return x >= 0; }));
}

}  // namespace

ModularityResult bipartite_modularity(const BipartiteNetwork& net, const ModularityOptions& options) {
    const auto& w = net.weights();
    double m = w.sum();
    if (m <= 0) throw InputError("modularity needs positive total weight");
    Eigen::MatrixXd p = w / m;
    Eigen::VectorXd k = p.rowwise().sum(), d = p.colwise().sum().transpose();
    Eigen::MatrixXd b = p - k * d.transpose();

    const int nf = static_cast<int>(net.n_features()), na = static_cast<int>(net.n_activities());
    ModularityResult best;
    best.q = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
        std::vector<int> red(static_cast<std::size_t>(nf)), blue(static_cast<std::size_t>(na));
        if (r == 0) {
            std::iota(red.begin(), red.end(), 0);
        } else {
            // random initial grouping of features into at most nf modules
            auto n_init = 1 + uniform_index(rng, static_cast<std::size_t>(nf));
            for (auto& l : red) l = static_cast<int>(uniform_index(rng, n_init));
        }
        std::iota(blue.begin(), blue.end(), nf);

        LabelPropagation lp(b, rng);
        lp.run(red, blue);
        while (merge_best_pair(b, red, blue)) lp.run(red, blue);

        double q = normalized_q(b, red, blue);
        if (q > best.q + 1e-14) {
            best.q = q;
            best.feature_modules = red;
            best.activity_modules = blue;
            best.restart = r;
        }
    }
    best.n_modules = canonicalize(best.feature_modules, best.activity_modules);
    best.q = bipartite_modularity_of(net, best.feature_modules, best.activity_modules);
    return best;
}

// ---------------------------------------------------------------------------
// Node statistics

NodeScores push_pull(const BipartiteNetwork& net) {
    if (!net.is_active()) throw InputError("push/pull is undefined for isolated nodes");
    const auto& w = net.weights();
    Eigen::VectorXd rt = net.feature_totals(), ct = net.activity_totals();
    NodeScores out{std::vector<double>(net.n_features(), 0.0), std::vector<double>(net.n_activities(), 0.0)};
    std::vector<int> fdeg(net.n_features(), 0), adeg(net.n_activities(), 0);
    for (Eigen::Index f = 0; f < w.rows(); ++f)
        for (Eigen::Index a = 0; a < w.cols(); ++a) {
            if (w(f, a) <= 0) continue;
            double f_on_a = w(f, a) / rt(f);  // d(f->a)
            double a_on_f = w(f, a) / ct(a);  // d(a->f)
            double denom = std::max(f_on_a, a_on_f);
            out.features[static_cast<std::size_t>(f)] += (a_on_f - f_on_a) / denom;
            out.activities[static_cast<std::size_t>(a)] += (f_on_a - a_on_f) / denom;
            ++fdeg[static_cast<std::size_t>(f)];
            ++adeg[static_cast<std::size_t>(a)];
        }
    for (std::size_t i = 0; i < fdeg.size(); ++i) out.features[i] /= fdeg[i];
    for (std::size_t i = 0; i < adeg.size(); ++i) out.activities[i] /= adeg[i];
    return out;
}

namespace {

std::vector<double> scaled_ranks(const Eigen::VectorXd& totals, const std::vector<std::string>& labels) {
    const std::size_t n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        double tx = totals(static_cast<Eigen::Index>(x)), ty = totals(static_cast<Eigen::Index>(y));
        if (!nearly_equal(tx, ty)) return tx > ty;
        return labels[x] < labels[y];
    });
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    for (std::size_t r = 0; r < n; ++r) out[order[r]] = static_cast<double>(r) / static_cast<double>(n - 1);
    return out;
}

}  // namespace

NodeScores nested_rank(const BipartiteNetwork& net) {
    return {scaled_ranks(net.feature_totals(), net.features()),
            scaled_ranks(net.activity_totals(), net.activities())};
}

NetworkStats network_stats(const BipartiteNetwork& net, const ModularityOptions& options) {
    auto a = require_active(net);
    NetworkStats s;
    s.n_features = a.n_features();
    s.n_activities = a.n_activities();
    s.total_weight = a.total();
    s.web_asymmetry = web_asymmetry(a);
    auto mod = bipartite_modularity(a, options);
    s.modularity = mod.q;
    s.n_modules = mod.n_modules;
    s.weighted_nestedness = weighted_nestedness(a);
    s.interaction_asymmetry = interaction_asymmetry(a);
    s.weighted_connectance = weighted_connectance(a);
    return s;
}

std::vector<NodeStat> node_stats(const BipartiteNetwork& net) {
    auto a = require_active(net);
    auto pp = push_pull(a);
    auto nr = nested_rank(a);
    std::vector<NodeStat> out;
    for (std::size_t i = 0; i < a.n_features(); ++i)
        out.push_back({NodeKind::feature, a.features()[i], pp.features[i], nr.features[i]});
    for (std::size_t i = 0; i < a.n_activities(); ++i)
        out.push_back({NodeKind::activity, a.activities()[i], pp.activities[i], nr.activities[i]});
    return out;
}

}  // namespace cesnet
