#include "modecfg/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace modecfg {

namespace {

double subset_objective(const Eigen::MatrixXd& costs,
                        const std::vector<int>& subset) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < costs.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int col : subset) best = std::min(best, costs(j, col));
    total += best;
  }
  return total;
}

Partition partition_from_subset(const Eigen::MatrixXd& costs,
                                const std::vector<int>& subset) {
  const int n = static_cast<int>(costs.rows());
  std::vector<int> assignment(n);
  for (int j = 0; j < n; ++j) {
    int best_g = 0;
    for (int g = 1; g < static_cast<int>(subset.size()); ++g) {
      if (costs(j, subset[g]) < costs(j, subset[best_g])) best_g = g;
    }
    assignment[j] = best_g;
  }
  return make_partition(costs, std::move(assignment), subset);
}

void validate_inputs(const Eigen::MatrixXd& costs, int k) {
  if (costs.rows() < 1 || costs.cols() < 1) {
    throw std::invalid_argument("cost matrix must be non-empty");
  }
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  if (k > costs.cols()) {
    throw std::invalid_argument("K exceeds the number of configurations");
  }
}

}  // namespace

Partition make_partition(const Eigen::MatrixXd& costs,
                         std::vector<int> assignment,
                         std::vector<int> representatives) {
  const int n = static_cast<int>(costs.rows());
  const int k = static_cast<int>(representatives.size());
  if (static_cast<int>(assignment.size()) != n) {
    throw std::invalid_argument("assignment length must match instance count");
  }
  Partition p;
  p.assignment = std::move(assignment);
  p.representatives = std::move(representatives);
  p.group_sizes.assign(k, 0);
  std::vector<double> sums(k, 0.0);
  for (int j = 0; j < n; ++j) {
    const int g = p.assignment[j];
    if (g < 0 || g >= k) throw std::invalid_argument("assignment id out of range");
    const int rep = p.representatives[g];
    if (rep < 0) throw std::invalid_argument("instance assigned to a dropped group");
    ++p.group_sizes[g];
    sums[g] += costs(j, rep);
  }
  p.per_group_cost.assign(k, std::numeric_limits<double>::quiet_NaN());
  p.total_cost = 0.0;
  p.k_effective = 0;
  for (int g = 0; g < k; ++g) {
    if (p.group_sizes[g] > 0) {
      p.per_group_cost[g] = sums[g] / p.group_sizes[g];
      p.total_cost += sums[g];
      ++p.k_effective;
    }
  }
  return p;
}

Partition partition_exact(const Eigen::MatrixXd& costs, int k,
                          std::int64_t budget) {
  validate_inputs(costs, k);
  const int m = static_cast<int>(costs.cols());
  const int n = static_cast<int>(costs.rows());

  double combos = 1.0;
  for (int i = 0; i < k; ++i) combos = combos * (m - i) / (i + 1);
  if (combos * n > static_cast<double>(budget)) {
    throw std::runtime_error(
        "subset enumeration over " + std::to_string(m) + " configurations at K=" +
        std::to_string(k) + " exceeds the evaluation budget; use partition_greedy");
  }

  // Lexicographic enumeration of all size-K column subsets; a larger subset
  // is never worse than its sub-subsets, so size exactly K suffices.
  std::vector<int> subset(k);
  std::iota(subset.begin(), subset.end(), 0);
  std::vector<int> best_subset;
  double best_cost = std::numeric_limits<double>::infinity();
  while (true) {
    const double c = subset_objective(costs, subset);
    if (c < best_cost) {
      best_cost = c;
      best_subset = subset;
    }
    int i = k - 1;
    while (i >= 0 && subset[i] == m - k + i) --i;
    if (i < 0) break;
    ++subset[i];
    for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
  }
  return partition_from_subset(costs, best_subset);
}

Partition partition_greedy(const Eigen::MatrixXd& costs, int k,
                           std::uint64_t seed, int restarts) {
  validate_inputs(costs, k);
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  const int m = static_cast<int>(costs.cols());
  std::mt19937_64 rng(seed);

  std::vector<int> best_subset;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<int> all(m);
  std::iota(all.begin(), all.end(), 0);

  for (int r = 0; r < restarts; ++r) {
    std::vector<int> pool = all;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<int> subset(pool.begin(), pool.begin() + k);
    std::sort(subset.begin(), subset.end());
    std::vector<char> chosen(m, 0);
    for (int c : subset) chosen[c] = 1;

    double cost = subset_objective(costs, subset);
    bool improved = true;
    while (improved) {
      improved = false;
      for (int p = 0; p < k && !improved; ++p) {
        for (int c = 0; c < m && !improved; ++c) {
          if (chosen[c]) continue;
          std::vector<int> trial = subset;
          trial[p] = c;
          std::sort(trial.begin(), trial.end());
          const double trial_cost = subset_objective(costs, trial);
          if (trial_cost < cost) {
            chosen[subset[p]] = 0;
            chosen[c] = 1;
            subset = std::move(trial);
            cost = trial_cost;
            improved = true;
          }
        }
      }
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_subset = subset;
    }
  }
  return partition_from_subset(costs, best_subset);
}

std::vector<int> kmeans_cluster(const Eigen::MatrixXd& features, int k,
                                std::uint64_t seed) {
  const int n = static_cast<int>(features.rows());
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  if (k > n) throw std::invalid_argument("K exceeds the number of rows");

  constexpr int kRestarts = 10;
  constexpr int kMaxIterations = 100;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<int> best_labels;
  double best_wcss = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < kRestarts; ++restart) {
    // k-means++ seeding.
    Eigen::MatrixXd centers(k, features.cols());
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    int first = static_cast<int>(unif(rng) * n);
    first = std::min(first, n - 1);
    centers.row(0) = features.row(first);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int j = 0; j < n; ++j) {
        dist2[j] = std::min(dist2[j],
                            (features.row(j) - centers.row(c - 1)).squaredNorm());
        total += dist2[j];
      }
      int pick;
      if (total > 0.0) {
        const double target = unif(rng) * total;
        double acc = 0.0;
        pick = n - 1;
        for (int j = 0; j < n; ++j) {
          acc += dist2[j];
          if (acc >= target) {
            pick = j;
            break;
          }
        }
      } else {
        pick = std::min(static_cast<int>(unif(rng) * n), n - 1);
      }
      centers.row(c) = features.row(pick);
    }

    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      bool changed = false;
      for (int j = 0; j < n; ++j) {
        int best_c = 0;
        double best_d = (features.row(j) - centers.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          const double d = (features.row(j) - centers.row(c)).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best_c = c;
          }
        }
        if (labels[j] != best_c) {
          labels[j] = best_c;
          changed = true;
        }
      }
      if (!changed) break;

      std::vector<int> counts(k, 0);
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, features.cols());
      for (int j = 0; j < n; ++j) {
        sums.row(labels[j]) += features.row(j);
        ++counts[labels[j]];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
          centers.row(c) = sums.row(c) / counts[c];
        } else {
          // Re-seed an empty cluster from the point farthest from its center.
          int far = 0;
          double far_d = -1.0;
          for (int j = 0; j < n; ++j) {
            const double d =
                (features.row(j) - centers.row(labels[j])).squaredNorm();
            if (d > far_d) {
              far_d = d;
              far = j;
            }
          }
          centers.row(c) = features.row(far);
        }
      }
    }

    double wcss = 0.0;
    for (int j = 0; j < n; ++j) {
      wcss += (features.row(j) - centers.row(labels[j])).squaredNorm();
    }
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_labels = labels;
    }
  }
  return best_labels;
}

Partition cluster_to_partition(const Eigen::MatrixXd& costs,
                               const std::vector<int>& cluster_ids) {
  const int n = static_cast<int>(costs.rows());
  if (static_cast<int>(cluster_ids.size()) != n) {
    throw std::invalid_argument("cluster ids length must match instance count");
  }
  const int k = 1 + *std::max_element(cluster_ids.begin(), cluster_ids.end());
  std::vector<int> reps(k, -1);
  for (int g = 0; g < k; ++g) {
    double best_mean = std::numeric_limits<double>::infinity();
    int count = 0;
    for (int col = 0; col < costs.cols(); ++col) {
      double sum = 0.0;
      count = 0;
      for (int j = 0; j < n; ++j) {
        if (cluster_ids[j] == g) {
          sum += costs(j, col);
          ++count;
        }
      }
      if (count > 0 && sum / count < best_mean) {
        best_mean = sum / count;
        reps[g] = col;
      }
    }
  }
  return make_partition(costs, cluster_ids, reps);
}

double partition_accuracy(const std::vector<int>& predicted,
                          const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("label vectors must have equal length");
  }
  if (predicted.empty()) return 1.0;
  int k = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || truth[i] < 0) {
      throw std::invalid_argument("labels must be non-negative");
    }
    k = std::max({k, predicted[i] + 1, truth[i] + 1});
  }
  if (k > 8) throw std::invalid_argument("accuracy enumeration supports <= 8 labels");

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int matches = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      if (perm[predicted[i]] == truth[i]) ++matches;
    }
    best = std::max(best, matches);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(predicted.size());
}

}  // namespace modecfg
