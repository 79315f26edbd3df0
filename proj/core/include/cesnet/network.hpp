#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cesnet/date.hpp"
#include "cesnet/ingest.hpp"
#include "cesnet/labeled_matrix.hpp"

namespace cesnet {

/// Weighted bipartite network: features are rows, activities are columns.
class BipartiteNetwork {
public:
    BipartiteNetwork() = default;
    /// Throws InputError on shape mismatch, duplicate labels, negative or non-finite weights.
    BipartiteNetwork(std::vector<std::string> features, std::vector<std::string> activities,
                     Eigen::MatrixXd weights);

    static BipartiteNetwork from_matrix(const LabeledMatrix& m);
    LabeledMatrix to_matrix() const;

    std::size_t n_features() const { return features_.size(); }
    std::size_t n_activities() const { return activities_.size(); }
    const std::vector<std::string>& features() const { return features_; }
    const std::vector<std::string>& activities() const { return activities_; }
    const std::vector<std::string>& labels(NodeKind k) const {
        return k == NodeKind::feature ? features_ : activities_;
    }
    const Eigen::MatrixXd& weights() const { return w_; }
    double weight(std::size_t f, std::size_t a) const {
        return w_(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(a));
    }

    /// Row marginals W_f+.
    Eigen::VectorXd feature_totals() const { return w_.rowwise().sum(); }
    /// Column marginals W_+a.
    Eigen::VectorXd activity_totals() const { return w_.colwise().sum().transpose(); }
    double total() const { return w_.sum(); }

    /// Copy without nodes whose marginal total is zero.
    BipartiteNetwork active() const;
    bool is_active() const;
    BipartiteNetwork scaled(double c) const;

private:
    std::vector<std::string> features_;
    std::vector<std::string> activities_;
    Eigen::MatrixXd w_;
};

/// Sums daily counts over `range` (must lie inside the counts window).
BipartiteNetwork build_network(const DailyCounts& counts, const DayRange& range);

// Global statistics. Nodes with zero marginal are dropped before evaluation.

/// (A - F) / (A + F) over retained node counts.
double web_asymmetry(const BipartiteNetwork& net);

/// Quantitative connectance: effective links per node from Shannon
/// diversity (base 2) of each node's weights, divided by node count.
double weighted_connectance(const BipartiteNetwork& net);

/// Weighted NODF scaled to [0, 1].
double weighted_nestedness(const BipartiteNetwork& net);

/// Mean over links of |d(f->a) - d(a->f)| / max(d(f->a), d(a->f)).
double interaction_asymmetry(const BipartiteNetwork& net);

struct ModularityOptions {
    int restarts = 20;
    std::uint64_t seed = 42;
};

struct ModularityResult {
    double q = 0.0;
    std::vector<int> feature_modules;
    std::vector<int> activity_modules;
    int n_modules = 0;
    /// Restart index that produced the partition.
    int restart = 0;
};

/// Weighted bipartite modularity of a given partition.
double bipartite_modularity_of(const BipartiteNetwork& net, const std::vector<int>& feature_modules,
                               const std::vector<int>& activity_modules);

/// Maximizes weighted bipartite modularity with seeded restarts of label
/// propagation followed by agglomerative module merging.
ModularityResult bipartite_modularity(const BipartiteNetwork& net, const ModularityOptions& options = {});

/// Per-node values for both kinds, in network label order.
struct NodeScores {
    std::vector<double> features;
    std::vector<double> activities;
};

/// Push/pull strength. Positive: partners depend on the node more than it
/// depends on them. Throws InputError if any node is isolated.
NodeScores push_pull(const BipartiteNetwork& net);

/// Scaled generality rank within each kind: 0 for the largest weighted
/// total, 1 for the smallest; ties broken by ascending label.
NodeScores nested_rank(const BipartiteNetwork& net);

struct NetworkStats {
    std::size_t n_features = 0;
    std::size_t n_activities = 0;
    double total_weight = 0.0;
    double web_asymmetry = 0.0;
    double modularity = 0.0;
    int n_modules = 0;
    double weighted_nestedness = 0.0;
    double interaction_asymmetry = 0.0;
    double weighted_connectance = 0.0;
};

/// All five global statistics on the retained (active) network.
NetworkStats network_stats(const BipartiteNetwork& net, const ModularityOptions& options = {});

struct NodeStat {
    NodeKind kind;
    std::string label;
    double push_pull;
    double nested_rank;
};

/// Node-level statistics on the retained network: features first, then activities.
std::vector<NodeStat> node_stats(const BipartiteNetwork& net);

}  // namespace cesnet
