#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modecfg/bandit.hpp"
#include "modecfg/evaluation.hpp"
#include "modecfg/param_space.hpp"
#include "modecfg/partition.hpp"
#include "modecfg/run_log.hpp"

namespace modecfg {

enum class StrategyKind { Single, Posthoc, Staged, Online };
enum class PartitionMethod { Exact, Greedy, Kmeans };

std::string to_string(StrategyKind kind);
std::string to_string(PartitionMethod method);
StrategyKind strategy_from_string(const std::string& s);
PartitionMethod partition_method_from_string(const std::string& s);

/// Evaluation budget. max_iterations counts optimizer generations; each
/// generation evaluates lambda candidate configurations, so all strategies
/// consume the same number of instance evaluations for a given budget (up to
/// one generation's worth).
struct Budget {
  int max_iterations = 100;
  double explore_fraction = 0.5;
};

struct StrategyOptions {
  StrategyKind kind = StrategyKind::Posthoc;
  int num_partitions = 2;
  Budget budget;
  std::uint64_t seed = 0;
  PartitionMethod method = PartitionMethod::Exact;
  bool warm_start = false;
  std::int64_t partition_budget = 50'000'000;
};

/// Full outcome of one tuning run.
struct StrategyResult {
  Partition partition;
  std::vector<Configuration> per_partition_config;
  ResponseMatrix matrix;
  RunLog log;

  Configuration baseline_config;  // best single configuration by dataset mean
  double baseline_cost = 0.0;
  double init_cost = 0.0;    // dataset mean of the initial configuration
  double oracle_mean = 0.0;  // mean of the per-instance best observed costs
  double weighted_mean_cost = 0.0;  // partitioned mean over all instances
  std::optional<double> score;      // normalized; absent on degenerate scale
};

/// Baseline: one CMA-ES loop over the whole dataset, telling each candidate
/// its mean cost. The initial configuration is injected as the first
/// candidate of the first generation, so it anchors both the matrix and the
/// reported normalization.
StrategyResult optimize_single(const ParamSpace& space, Evaluator& evaluator,
                               const std::vector<std::string>& instances,
                               const Budget& budget, std::uint64_t seed,
                               nlohmann::ordered_json problem = {});

/// optimize_single, then an optimal (or clustered) partition of the response
/// matrix and one representative configuration per group.
StrategyResult posthoc(const ParamSpace& space, Evaluator& evaluator,
                       const std::vector<std::string>& instances,
                       const Budget& budget, int num_partitions,
                       std::uint64_t seed,
                       PartitionMethod method = PartitionMethod::Exact,
                       nlohmann::ordered_json problem = {},
                       std::int64_t partition_budget = 50'000'000);

/// Explore with a shared loop for floor(M * explore_fraction) generations,
/// partition, then run one independent optimizer per group on its own
/// instances for the remaining generations. warm_start starts each group
/// optimizer from its group representative instead of the initial
/// configuration.
StrategyResult staged(const ParamSpace& space, Evaluator& evaluator,
                      const std::vector<std::string>& instances,
                      const Budget& budget, int num_partitions,
                      std::uint64_t seed,
                      PartitionMethod method = PartitionMethod::Exact,
                      bool warm_start = false,
                      nlohmann::ordered_json problem = {},
                      std::int64_t partition_budget = 50'000'000);

/// K optimizers compete for instances through per-instance Thompson bandits.
/// One shared generation seeds the bandits; afterwards each iteration costs
/// exactly one evaluation per instance. Final configurations are evaluated on
/// the full dataset once for reporting.
StrategyResult online(const ParamSpace& space, Evaluator& evaluator,
                      const std::vector<std::string>& instances,
                      const Budget& budget, int num_partitions,
                      std::uint64_t seed, nlohmann::ordered_json problem = {});

StrategyResult run_strategy(const ParamSpace& space, Evaluator& evaluator,
                            const std::vector<std::string>& instances,
                            const StrategyOptions& options,
                            nlohmann::ordered_json problem = {});

/// Deterministic derived seed for independent RNG streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace modecfg
