#pragma once

#include <limits>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "modecfg/param_space.hpp"

namespace modecfg {

/// Outcome of evaluating one configuration on one instance.
struct EvalOutcome {
  double cost = 0.0;
  bool failed = false;

  static EvalOutcome ok(double c) { return {c, false}; }
  static EvalOutcome fail() { return {0.0, true}; }
};

/// One candidate configuration and the instances to score it on.
struct EvalTask {
  Configuration config;
  std::vector<std::string> instances;
};

/// Boundary to the algorithm under tuning. Implementations must be
/// deterministic per (config, instance) and return outcomes in task order;
/// they are free to fan instance evaluations out concurrently inside.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::vector<std::vector<EvalOutcome>> evaluate(
      const std::vector<EvalTask>& tasks) = 0;
};

enum class CellState { Missing, Ok, Failed };

struct Cell {
  double value = 0.0;
  CellState state = CellState::Missing;
};

/// Costs of every evaluated configuration (rows) on every dataset instance
/// (columns). Lower is better. Cells are missing until evaluated; a "failed"
/// cell marks an evaluation that did not complete.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;
  explicit ResponseMatrix(std::vector<std::string> instance_ids);

  int num_configs() const { return static_cast<int>(rows_.size()); }
  int num_instances() const { return static_cast<int>(instance_ids_.size()); }
  const std::vector<std::string>& instance_ids() const { return instance_ids_; }
  const std::string& row_id(int i) const { return rows_.at(i).id; }
  const Configuration& config(int i) const { return rows_.at(i).config; }
  const Cell& cell(int config_idx, int instance_idx) const;

  int instance_index(const std::string& id) const;

  /// Row index for this configuration, inserting an empty row (id "r<index>")
  /// on first sight. Rows are keyed by configuration fingerprint.
  int upsert_config(const Configuration& cfg);

  /// Inserts a row with an explicit id and no attached configuration values
  /// (matrix-file mode). Throws on duplicate id.
  int add_row(const std::string& id);

  void set_cell(int config_idx, int instance_idx, EvalOutcome outcome);

  /// 2x the worst finite cost observed so far (overwritten cells stay
  /// observed); the surrogate cost charged to failed evaluations so they hurt
  /// without poisoning means. 1.0 until a finite cost exists.
  double failure_penalty() const;

  /// Arithmetic mean cost per configuration over the given instance subset
  /// (std::nullopt means all instances). Failed cells contribute
  /// failure_penalty(); missing cells are skipped; a row with no observed
  /// cell in the subset yields +infinity. Throws on an empty subset.
  std::vector<double> mean_per_config(
      const std::optional<std::vector<int>>& subset = std::nullopt) const;

  /// Column-wise minimum over observed finite costs; failure_penalty() for a
  /// column with none.
  std::vector<double> oracle_per_datum() const;

  /// True when every cell of the row is observed (ok or failed).
  bool row_complete(int config_idx) const;
  bool row_complete_on(int config_idx, const std::vector<int>& subset) const;

  /// N x M view (instances x configs) with failed and missing cells replaced
  /// by failure_penalty(); the substrate handed to the partitioners.
  Eigen::MatrixXd transposed_dense() const;

  /// Matrix CSV: header "config_id,<inst>,...", one row per configuration,
  /// cells as %.17g decimals, empty = missing, "fail" = failed. Files written
  /// here load and re-save byte-identically.
  std::string to_csv() const;
  static ResponseMatrix from_csv(const std::string& text);

  /// Merges rows of another matrix over the same instance set (same ids, same
  /// order); used to compute cross-run oracles.
  void merge(const ResponseMatrix& other);

 private:
  struct Row {
    std::string id;
    Configuration config;
    std::vector<Cell> cells;
  };
  std::vector<std::string> instance_ids_;
  std::unordered_map<std::string, int> instance_index_;
  std::vector<Row> rows_;
  std::unordered_map<std::string, int> row_by_fingerprint_;
  std::unordered_map<std::string, int> row_by_id_;
  double worst_finite_ = -std::numeric_limits<double>::infinity();
};

/// (cost - oracle) / (init - oracle): 0 at oracle level, 1 at initialization
/// level, clamped below at 0. Throws std::invalid_argument when the scale is
/// degenerate (init <= oracle); callers report raw costs instead.
double normalized_score(double cost, double init_cost, double oracle_cost);

/// Shifts each row to zero mean and scales to unit population variance;
/// zero-variance rows map to all-zeros. Requires >= 2 columns.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& m);

/// 1-nearest-neighbor by Euclidean distance; ties go to the lowest training
/// index.
int knn_predict_partition(const std::vector<Eigen::VectorXd>& train_features,
                          const std::vector<int>& train_labels,
                          const Eigen::VectorXd& query);

/// Cache of evaluation outcomes keyed by (configuration fingerprint,
/// instance id). Lookups may run concurrently; insertion is exclusive.
class EvalCache {
 public:
  std::optional<EvalOutcome> lookup(const std::string& fingerprint,
                                    const std::string& instance) const;
  void insert(const std::string& fingerprint, const std::string& instance,
              EvalOutcome outcome);
  std::size_t size() const;

  /// JSONL persistence; load tolerates a missing file.
  void load_file(const std::string& path);
  void append_to_file(const std::string& path,
                      const std::string& fingerprint,
                      const std::string& instance, EvalOutcome outcome) const;

 private:
  static std::string key(const std::string& fp, const std::string& inst);
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, EvalOutcome> entries_;
};

}  // namespace modecfg
