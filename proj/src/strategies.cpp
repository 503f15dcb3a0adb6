#include "modecfg/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "modecfg/cma_es.hpp"

namespace modecfg {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Single: return "single";
    case StrategyKind::Posthoc: return "posthoc";
    case StrategyKind::Staged: return "staged";
    case StrategyKind::Online: return "online";
  }
  return "?";
}

std::string to_string(PartitionMethod method) {
  switch (method) {
    case PartitionMethod::Exact: return "exact";
    case PartitionMethod::Greedy: return "greedy";
    case PartitionMethod::Kmeans: return "kmeans";
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& s) {
  if (s == "single") return StrategyKind::Single;
  if (s == "posthoc") return StrategyKind::Posthoc;
  if (s == "staged") return StrategyKind::Staged;
  if (s == "online") return StrategyKind::Online;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

PartitionMethod partition_method_from_string(const std::string& s) {
  if (s == "exact") return PartitionMethod::Exact;
  if (s == "greedy") return PartitionMethod::Greedy;
  if (s == "kmeans") return PartitionMethod::Kmeans;
  throw std::invalid_argument("unknown partition method '" + s + "'");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

constexpr int kGreedyRestarts = 20;

void validate_budget(const Budget& b) {
  if (b.max_iterations < 2) {
    throw std::invalid_argument("budget must allow at least 2 generations");
  }
  if (!(b.explore_fraction > 0.0) || !(b.explore_fraction < 1.0)) {
    throw std::invalid_argument("explore fraction must be in (0, 1)");
  }
}

/// Shared bookkeeping for one tuning run: the matrix, the log, and the
/// evaluation counter.
class Session {
 public:
  Session(Evaluator& evaluator, const std::vector<std::string>& instances,
          const std::string& strategy, std::uint64_t seed,
          nlohmann::ordered_json problem)
      : evaluator_(evaluator),
        instance_ids_(instances),
        matrix_(instances),
        log_(strategy, seed, instances, std::move(problem)) {
    if (instances.empty()) throw std::invalid_argument("dataset is empty");
    all_instances_.resize(instances.size());
    std::iota(all_instances_.begin(), all_instances_.end(), 0);
  }

  const std::vector<int>& all_instances() const { return all_instances_; }
  int num_instances() const { return static_cast<int>(instance_ids_.size()); }
  ResponseMatrix& matrix() { return matrix_; }
  RunLog& log() { return log_; }

  struct Group {
    Configuration config;
    std::vector<int> instances;
  };

  /// Evaluates every group's configuration on its instances in one evaluator
  /// call, writes the cells, appends one log record and returns the row index
  /// of each group's configuration.
  std::vector<int> evaluate(const std::string& phase, int group,
                            const std::vector<Group>& groups,
                            const std::vector<int>& assignment = {}) {
    std::vector<EvalTask> tasks;
    tasks.reserve(groups.size());
    for (const auto& g : groups) {
      EvalTask task;
      task.config = g.config;
      for (int j : g.instances) task.instances.push_back(instance_ids_[j]);
      tasks.push_back(std::move(task));
    }
    const auto outcomes = evaluator_.evaluate(tasks);

    LogRecord rec;
    rec.iteration = ++iteration_;
    rec.phase = phase;
    rec.group = group;
    rec.assignment = assignment;
    std::vector<int> rows;
    rows.reserve(groups.size());
    for (std::size_t t = 0; t < groups.size(); ++t) {
      const int row = matrix_.upsert_config(groups[t].config);
      rows.push_back(row);
      CandidateRecord cand;
      cand.row_id = matrix_.row_id(row);
      cand.config = groups[t].config;
      for (std::size_t u = 0; u < groups[t].instances.size(); ++u) {
        const int j = groups[t].instances[u];
        matrix_.set_cell(row, j, outcomes[t][u]);
        cand.costs.emplace_back(instance_ids_[j], outcomes[t][u]);
        ++evals_;
      }
      rec.candidates.push_back(std::move(cand));
    }
    rec.evals = evals_;
    log_.append(std::move(rec));
    return rows;
  }

  /// Appends a candidate-free record carrying a partition snapshot.
  void record_partition(const Partition& partition) {
    LogRecord rec;
    rec.iteration = ++iteration_;
    rec.evals = evals_;
    rec.phase = "partition";
    rec.assignment = partition.assignment;
    rec.representatives = rep_row_ids(partition.representatives);
    log_.append(std::move(rec));
  }

  std::vector<std::string> rep_row_ids(const std::vector<int>& reps) const {
    std::vector<std::string> ids;
    ids.reserve(reps.size());
    for (int r : reps) ids.push_back(r >= 0 ? matrix_.row_id(r) : "");
    return ids;
  }

  /// Mean cost of one row over an instance subset; every requested cell must
  /// be observed. Failed cells cost the current failure penalty.
  double row_mean(int row, const std::vector<int>& subset) const {
    const double penalty = matrix_.failure_penalty();
    double sum = 0.0;
    for (int j : subset) {
      const Cell& c = matrix_.cell(row, j);
      switch (c.state) {
        case CellState::Ok: sum += c.value; break;
        case CellState::Failed: sum += penalty; break;
        case CellState::Missing:
          throw std::logic_error("row mean over an unobserved cell");
      }
    }
    return sum / static_cast<double>(subset.size());
  }

 private:
  Evaluator& evaluator_;
  std::vector<std::string> instance_ids_;
  std::vector<int> all_instances_;
  ResponseMatrix matrix_;
  RunLog log_;
  std::int64_t iteration_ = 0;
  std::int64_t evals_ = 0;
};

/// Runs one CMA-ES loop for `generations` generations over the given
/// instances, injecting `inject` as the first candidate of the first
/// generation. Returns the row indices of every evaluated candidate.
std::vector<int> run_cma_loop(Session& session, const ParamSpace& space,
                              CmaEs& optimizer, int generations,
                              const std::vector<int>& instances,
                              const SearchPoint& inject,
                              const std::string& phase, int group) {
  std::vector<int> rows;
  for (int g = 0; g < generations; ++g) {
    CandidateBatch batch = optimizer.ask();
    if (g == 0) batch.points[0] = inject;
    std::vector<Session::Group> groups;
    groups.reserve(batch.points.size());
    for (const auto& pt : batch.points) {
      groups.push_back({from_search_space(space, pt), instances});
    }
    const auto batch_rows = session.evaluate(phase, group, groups);
    std::vector<double> costs;
    costs.reserve(batch_rows.size());
    for (int row : batch_rows) costs.push_back(session.row_mean(row, instances));
    optimizer.tell(batch, costs);
    rows.insert(rows.end(), batch_rows.begin(), batch_rows.end());
  }
  return rows;
}

Partition partition_matrix(const ResponseMatrix& matrix, int k,
                           PartitionMethod method, std::uint64_t seed,
                           std::int64_t partition_budget) {
  const Eigen::MatrixXd dense = matrix.transposed_dense();
  switch (method) {
    case PartitionMethod::Exact:
      return partition_exact(dense, k, partition_budget);
    case PartitionMethod::Greedy:
      return partition_greedy(dense, k, mix_seed(seed, 3), kGreedyRestarts);
    case PartitionMethod::Kmeans: {
      const auto labels =
          kmeans_cluster(normalize_rows(dense), k, mix_seed(seed, 4));
      return cluster_to_partition(dense, labels);
    }
  }
  throw std::logic_error("unknown partition method");
}

/// Best configuration by whole-dataset mean among fully evaluated rows.
std::pair<int, double> best_complete_row(const ResponseMatrix& matrix,
                                         const std::vector<double>& means) {
  int best = -1;
  for (int r = 0; r < matrix.num_configs(); ++r) {
    if (!matrix.row_complete(r)) continue;
    if (best < 0 || means[r] < means[best]) best = r;
  }
  if (best < 0) throw std::logic_error("no fully evaluated configuration");
  return {best, means[best]};
}

StrategyResult finalize(Session& session, Partition partition) {
  StrategyResult result;
  ResponseMatrix& matrix = session.matrix();

  result.per_partition_config.reserve(partition.representatives.size());
  for (int g = 0; g < partition.k(); ++g) {
    const int rep = partition.representatives[g];
    result.per_partition_config.push_back(rep >= 0 ? matrix.config(rep)
                                                   : matrix.config(0));
  }

  const auto means = matrix.mean_per_config();
  const auto [best_row, best_mean] = best_complete_row(matrix, means);
  result.baseline_config = matrix.config(best_row);
  result.baseline_cost = best_mean;
  result.init_cost = means[0];  // row 0 is always the injected initial config

  const auto oracle = matrix.oracle_per_datum();
  result.oracle_mean =
      std::accumulate(oracle.begin(), oracle.end(), 0.0) / oracle.size();
  result.weighted_mean_cost = partition.weighted_mean();
  if (result.init_cost > result.oracle_mean) {
    result.score = normalized_score(result.weighted_mean_cost, result.init_cost,
                                    result.oracle_mean);
  }

  result.partition = std::move(partition);
  result.matrix = std::move(matrix);
  result.log = std::move(session.log());
  return result;
}

Partition single_partition(const ResponseMatrix& matrix) {
  const auto means = matrix.mean_per_config();
  const auto [best_row, _] = best_complete_row(matrix, means);
  return make_partition(matrix.transposed_dense(),
                        std::vector<int>(matrix.num_instances(), 0),
                        {best_row});
}

}  // namespace

StrategyResult optimize_single(const ParamSpace& space, Evaluator& evaluator,
                               const std::vector<std::string>& instances,
                               const Budget& budget, std::uint64_t seed,
                               nlohmann::ordered_json problem) {
  validate_budget(budget);
  Session session(evaluator, instances, "single", seed,
                  std::move(problem));
  const SearchPoint x0 = to_search_space(space, space.initial_configuration());
  CmaEs optimizer(x0, space.sigma0(), 0, mix_seed(seed, 1));
  run_cma_loop(session, space, optimizer, budget.max_iterations,
               session.all_instances(), x0, "explore", -1);
  return finalize(session, single_partition(session.matrix()));
}

StrategyResult posthoc(const ParamSpace& space, Evaluator& evaluator,
                       const std::vector<std::string>& instances,
                       const Budget& budget, int num_partitions,
                       std::uint64_t seed, PartitionMethod method,
                       nlohmann::ordered_json problem,
                       std::int64_t partition_budget) {
  validate_budget(budget);
  if (num_partitions < 1) throw std::invalid_argument("K must be >= 1");
  Session session(evaluator, instances, "posthoc", seed,
                  std::move(problem));
  const SearchPoint x0 = to_search_space(space, space.initial_configuration());
  CmaEs optimizer(x0, space.sigma0(), 0, mix_seed(seed, 1));
  run_cma_loop(session, space, optimizer, budget.max_iterations,
               session.all_instances(), x0, "explore", -1);

  Partition partition = partition_matrix(session.matrix(), num_partitions,
                                         method, seed, partition_budget);
  session.record_partition(partition);
  return finalize(session, std::move(partition));
}

StrategyResult staged(const ParamSpace& space, Evaluator& evaluator,
                      const std::vector<std::string>& instances,
                      const Budget& budget, int num_partitions,
                      std::uint64_t seed, PartitionMethod method,
                      bool warm_start, nlohmann::ordered_json problem,
                      std::int64_t partition_budget) {
  validate_budget(budget);
  if (num_partitions < 1) throw std::invalid_argument("K must be >= 1");
  const int explore_gens = static_cast<int>(
      std::floor(budget.max_iterations * budget.explore_fraction));
  if (explore_gens < 1) {
    throw std::invalid_argument("explore phase needs at least one generation");
  }
  const int exploit_gens = budget.max_iterations - explore_gens;

  Session session(evaluator, instances, "staged", seed,
                  std::move(problem));
  const SearchPoint x0 = to_search_space(space, space.initial_configuration());
  CmaEs explorer(x0, space.sigma0(), 0, mix_seed(seed, 1));
  run_cma_loop(session, space, explorer, explore_gens, session.all_instances(),
               x0, "explore", -1);

  Partition explored = partition_matrix(session.matrix(), num_partitions,
                                        method, seed, partition_budget);
  session.record_partition(explored);

  const int k = explored.k();
  std::vector<std::vector<int>> members(k);
  for (int j = 0; j < session.num_instances(); ++j) {
    members[explored.assignment[j]].push_back(j);
  }

  // One independent optimizer per non-empty group, interleaved round-robin
  // one generation at a time.
  std::vector<std::optional<CmaEs>> optimizers(k);
  std::vector<SearchPoint> starts(k, x0);
  for (int g = 0; g < k; ++g) {
    if (members[g].empty()) continue;
    if (warm_start) {
      starts[g] = to_search_space(
          space, session.matrix().config(explored.representatives[g]));
    }
    optimizers[g].emplace(starts[g], space.sigma0(), 0, mix_seed(seed, 100 + g));
  }
  for (int round = 0; round < exploit_gens; ++round) {
    for (int g = 0; g < k; ++g) {
      if (!optimizers[g]) continue;
      CandidateBatch batch = optimizers[g]->ask();
      if (round == 0) batch.points[0] = starts[g];
      std::vector<Session::Group> groups;
      for (const auto& pt : batch.points) {
        groups.push_back({from_search_space(space, pt), members[g]});
      }
      const auto rows = session.evaluate("exploit", g, groups);
      std::vector<double> costs;
      for (int row : rows) costs.push_back(session.row_mean(row, members[g]));
      optimizers[g]->tell(batch, costs);
    }
  }

  // Final representative per group: the configuration with the best group
  // mean among all rows measured on the whole group. This includes the
  // explore-phase representative, so exploitation never reports worse than
  // exploration.
  std::vector<int> reps = explored.representatives;
  for (int g = 0; g < k; ++g) {
    if (members[g].empty()) continue;
    int best = -1;
    double best_mean = std::numeric_limits<double>::infinity();
    for (int r = 0; r < session.matrix().num_configs(); ++r) {
      if (!session.matrix().row_complete_on(r, members[g])) continue;
      const double mean = session.row_mean(r, members[g]);
      if (mean < best_mean) {
        best_mean = mean;
        best = r;
      }
    }
    reps[g] = best;
  }
  Partition partition = make_partition(session.matrix().transposed_dense(),
                                       explored.assignment, reps);
  return finalize(session, std::move(partition));
}

StrategyResult online(const ParamSpace& space, Evaluator& evaluator,
                      const std::vector<std::string>& instances,
                      const Budget& budget, int num_partitions,
                      std::uint64_t seed, nlohmann::ordered_json problem) {
  validate_budget(budget);
  if (num_partitions < 1) throw std::invalid_argument("K must be >= 1");
  const int k = num_partitions;

  Session session(evaluator, instances, "online", seed,
                  std::move(problem));
  const int n = session.num_instances();
  const SearchPoint x0 = to_search_space(space, space.initial_configuration());

  // One shared generation seeds the per-instance bandits; none of the K
  // optimizers is told about it.
  CmaEs sampler(x0, space.sigma0(), 0, mix_seed(seed, 1));
  CandidateBatch init_batch = sampler.ask();
  init_batch.points[0] = x0;
  const int lambda = sampler.lambda();
  std::vector<Session::Group> init_groups;
  for (const auto& pt : init_batch.points) {
    init_groups.push_back({from_search_space(space, pt), session.all_instances()});
  }
  const auto init_rows = session.evaluate("init", -1, init_groups);

  BanditState bandits(n, k);
  {
    const double penalty = session.matrix().failure_penalty();
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int row : init_rows) {
        const Cell& c = session.matrix().cell(row, j);
        sum += c.state == CellState::Ok ? c.value : penalty;
      }
      const double mean = sum / init_rows.size();
      double var = 0.0;
      for (int row : init_rows) {
        const Cell& c = session.matrix().cell(row, j);
        const double v = c.state == CellState::Ok ? c.value : penalty;
        var += (v - mean) * (v - mean);
      }
      bandits.init_instance(j, mean, std::sqrt(var / init_rows.size()));
    }
  }

  struct OptimizerSlot {
    CmaEs optimizer;
    CandidateBatch batch;
    std::vector<double> costs;
    int cursor = 0;
    OptimizerSlot(const SearchPoint& x0, double sigma0, std::uint64_t seed)
        : optimizer(x0, sigma0, 0, seed), batch(optimizer.ask()) {
      costs.resize(optimizer.lambda());
    }
  };
  std::vector<OptimizerSlot> slots;
  slots.reserve(k);
  for (int g = 0; g < k; ++g) {
    slots.emplace_back(x0, space.sigma0(), mix_seed(seed, 100 + g));
  }

  std::mt19937_64 bandit_rng(mix_seed(seed, 2));
  const int total_iterations = (budget.max_iterations - 1) * lambda;

  for (int t = 0; t < total_iterations; ++t) {
    std::vector<int> arms(n);
    std::vector<std::vector<int>> pulled(k);
    for (int j = 0; j < n; ++j) {
      arms[j] = bandits.pull(j, bandit_rng);
      pulled[arms[j]].push_back(j);
    }

    std::vector<Session::Group> groups;
    std::vector<int> active;
    for (int g = 0; g < k; ++g) {
      if (pulled[g].empty()) continue;  // not evaluated, re-offered next round
      groups.push_back(
          {from_search_space(space, slots[g].batch.points[slots[g].cursor]),
           pulled[g]});
      active.push_back(g);
    }
    const auto rows = session.evaluate("online", -1, groups, arms);

    const double penalty = session.matrix().failure_penalty();
    for (std::size_t idx = 0; idx < active.size(); ++idx) {
      const int g = active[idx];
      const int row = rows[idx];
      for (int j : pulled[g]) {
        const Cell& c = session.matrix().cell(row, j);
        bandits.update(j, g, c.state == CellState::Ok ? c.value : penalty);
      }
      auto& slot = slots[g];
      slot.costs[slot.cursor] = session.row_mean(row, pulled[g]);
      if (++slot.cursor == slot.optimizer.lambda()) {
        slot.optimizer.tell(slot.batch, slot.costs);
        slot.batch = slot.optimizer.ask();
        slot.cursor = 0;
      }
    }
  }

  // Final assignment from the bandits; each optimizer's best configuration is
  // measured once on the full dataset so reporting uses observed costs.
  std::vector<int> assignment(n);
  for (int j = 0; j < n; ++j) assignment[j] = bandits.best_arm(j);

  std::vector<Configuration> final_configs;
  for (int g = 0; g < k; ++g) {
    final_configs.push_back(
        slots[g].optimizer.has_recommendation()
            ? from_search_space(space, slots[g].optimizer.recommend())
            : space.initial_configuration());
  }
  std::vector<Session::Group> final_groups;
  for (const auto& cfg : final_configs) {
    final_groups.push_back({cfg, session.all_instances()});
  }
  const auto reps = session.evaluate("final", -1, final_groups, assignment);
  session.log().last_record().representatives = session.rep_row_ids(reps);

  Partition partition = make_partition(session.matrix().transposed_dense(),
                                       assignment, reps);
  return finalize(session, std::move(partition));
}

StrategyResult run_strategy(const ParamSpace& space, Evaluator& evaluator,
                            const std::vector<std::string>& instances,
                            const StrategyOptions& options,
                            nlohmann::ordered_json problem) {
  switch (options.kind) {
    case StrategyKind::Single:
      return optimize_single(space, evaluator, instances, options.budget,
                             options.seed, std::move(problem));
    case StrategyKind::Posthoc:
      return posthoc(space, evaluator, instances, options.budget,
                     options.num_partitions, options.seed, options.method,
                     std::move(problem), options.partition_budget);
    case StrategyKind::Staged:
      return staged(space, evaluator, instances, options.budget,
                    options.num_partitions, options.seed, options.method,
                    options.warm_start, std::move(problem),
                    options.partition_budget);
    case StrategyKind::Online:
      return online(space, evaluator, instances, options.budget,
                    options.num_partitions, options.seed, std::move(problem));
  }
  throw std::logic_error("unknown strategy");
}

}  // namespace modecfg
