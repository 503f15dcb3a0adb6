#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace modecfg {

/// Assignment of N instances to at most K configuration groups. Cost matrices
/// here are N x M (instance rows, configuration columns), i.e. the transpose
/// of the ResponseMatrix layout. K is an upper bound: a group no instance
/// prefers is "dropped" (size 0, cost NaN) and excluded from k_effective.
struct Partition {
  std::vector<int> assignment;       // length N, values in 0..K-1
  std::vector<int> representatives;  // length K, config column indices (-1 if none)
  std::vector<double> per_group_cost;  // mean over the group's instances; NaN if dropped
  std::vector<int> group_sizes;
  double total_cost = 0.0;  // sum over instances of their group rep's cost
  int k_effective = 0;

  int k() const { return static_cast<int>(representatives.size()); }
  double weighted_mean() const {
    return total_cost / static_cast<double>(assignment.size());
  }
};

/// Builds a Partition from a fixed assignment and per-group representative
/// columns, recomputing group costs and the total from the matrix.
Partition make_partition(const Eigen::MatrixXd& costs,
                         std::vector<int> assignment,
                         std::vector<int> representatives);

/// Globally optimal partition: the size-<=K subset S of configurations
/// minimizing sum_j min_{i in S} costs(j, i), found by exhaustive subset
/// enumeration; each instance then goes to its best configuration in S (ties
/// to the lowest column index). Throws std::invalid_argument for K > M and a
/// capacity error (std::runtime_error) when N * C(M, K) exceeds the budget;
/// use partition_greedy beyond that.
Partition partition_exact(const Eigen::MatrixXd& costs, int k,
                          std::int64_t budget = 50'000'000);

/// Local-search stand-in for partition_exact at scales where enumeration is
/// too large: from `restarts` random subsets, swap one chosen column for one
/// unchosen while that strictly improves the objective. Deterministic per
/// seed; never better than the exact optimum.
Partition partition_greedy(const Eigen::MatrixXd& costs, int k,
                           std::uint64_t seed, int restarts);

/// Lloyd k-means with k-means++ seeding, 10 restarts, squared Euclidean
/// distance, keeping the labeling with the best within-cluster sum of
/// squares. Empty clusters are re-seeded from the farthest point. Rows are
/// expected to be pre-normalized (see normalize_rows).
std::vector<int> kmeans_cluster(const Eigen::MatrixXd& features, int k,
                                std::uint64_t seed);

/// Turns a clustering into a Partition: each cluster's representative is the
/// configuration with the lowest mean cost over that cluster's instances
/// (ties to the lowest column index).
Partition cluster_to_partition(const Eigen::MatrixXd& costs,
                               const std::vector<int>& cluster_ids);

/// Fraction of instances whose predicted group matches the truth under the
/// best relabeling, computed exactly by enumerating label permutations
/// (supported up to 8 labels).
double partition_accuracy(const std::vector<int>& predicted,
                          const std::vector<int>& truth);

}  // namespace modecfg
