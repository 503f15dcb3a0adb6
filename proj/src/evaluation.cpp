#include "modecfg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace modecfg {

namespace {

std::string format_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void check_plain_id(const std::string& id) {
  if (id.empty() || id.find_first_of(",\"\n\r") != std::string::npos) {
    throw std::invalid_argument("identifier '" + id +
                                "' is empty or contains CSV metacharacters");
  }
}

}  // namespace

ResponseMatrix::ResponseMatrix(std::vector<std::string> instance_ids)
    : instance_ids_(std::move(instance_ids)) {
  if (instance_ids_.empty()) {
    throw std::invalid_argument("response matrix needs at least one instance");
  }
  for (int j = 0; j < static_cast<int>(instance_ids_.size()); ++j) {
    check_plain_id(instance_ids_[j]);
    if (!instance_index_.emplace(instance_ids_[j], j).second) {
      throw std::invalid_argument("duplicate instance id '" + instance_ids_[j] +
                                  "'");
    }
  }
}

const Cell& ResponseMatrix::cell(int config_idx, int instance_idx) const {
  return rows_.at(config_idx).cells.at(instance_idx);
}

int ResponseMatrix::instance_index(const std::string& id) const {
  auto it = instance_index_.find(id);
  if (it == instance_index_.end()) {
    throw std::invalid_argument("unknown instance id '" + id + "'");
  }
  return it->second;
}

int ResponseMatrix::upsert_config(const Configuration& cfg) {
  const std::string fp = cfg.fingerprint();
  auto it = row_by_fingerprint_.find(fp);
  if (it != row_by_fingerprint_.end()) return it->second;
  const int idx = num_configs();
  Row row;
  row.id = "r" + std::to_string(idx);
  row.config = cfg;
  row.cells.resize(instance_ids_.size());
  rows_.push_back(std::move(row));
  row_by_fingerprint_.emplace(fp, idx);
  row_by_id_.emplace(rows_.back().id, idx);
  return idx;
}

int ResponseMatrix::add_row(const std::string& id) {
  check_plain_id(id);
  if (row_by_id_.count(id)) {
    throw std::invalid_argument("duplicate config id '" + id + "'");
  }
  const int idx = num_configs();
  Row row;
  row.id = id;
  row.cells.resize(instance_ids_.size());
  rows_.push_back(std::move(row));
  row_by_id_.emplace(id, idx);
  return idx;
}

void ResponseMatrix::set_cell(int config_idx, int instance_idx,
                              EvalOutcome outcome) {
  Cell& c = rows_.at(config_idx).cells.at(instance_idx);
  if (outcome.failed || !std::isfinite(outcome.cost)) {
    c = Cell{0.0, CellState::Failed};
  } else {
    c = Cell{outcome.cost, CellState::Ok};
    worst_finite_ = std::max(worst_finite_, outcome.cost);
  }
}

double ResponseMatrix::failure_penalty() const {
  if (!std::isfinite(worst_finite_)) return 1.0;
  return 2.0 * worst_finite_;
}

std::vector<double> ResponseMatrix::mean_per_config(
    const std::optional<std::vector<int>>& subset) const {
  std::vector<int> cols;
  if (subset) {
    if (subset->empty()) throw std::invalid_argument("empty instance subset");
    cols = *subset;
  } else {
    cols.resize(instance_ids_.size());
    std::iota(cols.begin(), cols.end(), 0);
  }
  const double penalty = failure_penalty();
  std::vector<double> means(rows_.size());
  for (int i = 0; i < num_configs(); ++i) {
    double sum = 0.0;
    int n = 0;
    for (int j : cols) {
      const Cell& c = rows_[i].cells.at(j);
      if (c.state == CellState::Ok) {
        sum += c.value;
        ++n;
      } else if (c.state == CellState::Failed) {
        sum += penalty;
        ++n;
      }
    }
    means[i] = n > 0 ? sum / n : std::numeric_limits<double>::infinity();
  }
  return means;
}

std::vector<double> ResponseMatrix::oracle_per_datum() const {
  const double penalty = failure_penalty();
  std::vector<double> oracle(instance_ids_.size(),
                             std::numeric_limits<double>::infinity());
  for (const auto& row : rows_) {
    for (int j = 0; j < num_instances(); ++j) {
      if (row.cells[j].state == CellState::Ok) {
        oracle[j] = std::min(oracle[j], row.cells[j].value);
      }
    }
  }
  for (double& v : oracle) {
    if (!std::isfinite(v)) v = penalty;
  }
  return oracle;
}

bool ResponseMatrix::row_complete(int config_idx) const {
  const auto& cells = rows_.at(config_idx).cells;
  return std::all_of(cells.begin(), cells.end(), [](const Cell& c) {
    return c.state != CellState::Missing;
  });
}

bool ResponseMatrix::row_complete_on(int config_idx,
                                     const std::vector<int>& subset) const {
  const auto& cells = rows_.at(config_idx).cells;
  return std::all_of(subset.begin(), subset.end(), [&](int j) {
    return cells.at(j).state != CellState::Missing;
  });
}

Eigen::MatrixXd ResponseMatrix::transposed_dense() const {
  const double penalty = failure_penalty();
  Eigen::MatrixXd m(num_instances(), num_configs());
  for (int i = 0; i < num_configs(); ++i) {
    for (int j = 0; j < num_instances(); ++j) {
      const Cell& c = rows_[i].cells[j];
      m(j, i) = c.state == CellState::Ok ? c.value : penalty;
    }
  }
  return m;
}

std::string ResponseMatrix::to_csv() const {
  std::string out = "config_id";
  for (const auto& id : instance_ids_) {
    out += ',';
    out += id;
  }
  out += '\n';
  for (const auto& row : rows_) {
    out += row.id;
    for (const auto& c : row.cells) {
      out += ',';
      switch (c.state) {
        case CellState::Missing: break;
        case CellState::Failed: out += "fail"; break;
        case CellState::Ok: out += format_cell(c.value); break;
      }
    }
    out += '\n';
  }
  return out;
}

ResponseMatrix ResponseMatrix::from_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) {
    throw std::invalid_argument("matrix CSV is empty");
  }
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "config_id") {
    throw std::invalid_argument("matrix CSV must start with a config_id header");
  }
  ResponseMatrix m(
      std::vector<std::string>(header.begin() + 1, header.end()));
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("matrix CSV row '" + fields[0] +
                                  "' has wrong cell count");
    }
    const int row = m.add_row(fields[0]);
    for (int j = 0; j < m.num_instances(); ++j) {
      const std::string& cell = fields[j + 1];
      if (cell.empty()) continue;
      if (cell == "fail") {
        m.set_cell(row, j, EvalOutcome::fail());
      } else {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(cell, &used);
        } catch (const std::exception&) {
          throw std::invalid_argument("bad matrix cell '" + cell + "'");
        }
        if (used != cell.size()) {
          throw std::invalid_argument("bad matrix cell '" + cell + "'");
        }
        m.set_cell(row, j, EvalOutcome::ok(v));
      }
    }
  }
  return m;
}

void ResponseMatrix::merge(const ResponseMatrix& other) {
  if (other.instance_ids_ != instance_ids_) {
    throw std::invalid_argument("cannot merge matrices over different instances");
  }
  for (const auto& row : other.rows_) {
    int idx;
    if (!row.config.values.empty()) {
      idx = upsert_config(row.config);
    } else {
      // Config-less rows (matrix-file mode) carry no identity beyond their
      // id; on collision the incoming row is kept separate.
      std::string id = row.id;
      for (int n = 2; row_by_id_.count(id); ++n) {
        id = row.id + "#" + std::to_string(n);
      }
      idx = add_row(id);
    }
    for (int j = 0; j < num_instances(); ++j) {
      if (row.cells[j].state != CellState::Missing &&
          rows_[idx].cells[j].state == CellState::Missing) {
        set_cell(idx, j, row.cells[j].state == CellState::Failed
                             ? EvalOutcome::fail()
                             : EvalOutcome::ok(row.cells[j].value));
      }
    }
  }
}

double normalized_score(double cost, double init_cost, double oracle_cost) {
  if (!(init_cost > oracle_cost)) {
    throw std::invalid_argument(
        "degenerate normalization scale: init <= oracle");
  }
  const double s = (cost - oracle_cost) / (init_cost - oracle_cost);
  return std::max(s, 0.0);
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& m) {
  if (m.cols() < 2) {
    throw std::invalid_argument("normalize_rows needs at least 2 columns");
  }
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mean = m.row(r).mean();
    const Eigen::RowVectorXd centered = m.row(r).array() - mean;
    const double var = centered.squaredNorm() / m.cols();
    out.row(r) = var > 0.0 ? (centered / std::sqrt(var)).eval()
                           : Eigen::RowVectorXd::Zero(m.cols()).eval();
  }
  return out;
}

int knn_predict_partition(const std::vector<Eigen::VectorXd>& train_features,
                          const std::vector<int>& train_labels,
                          const Eigen::VectorXd& query) {
  if (train_features.empty() || train_features.size() != train_labels.size()) {
    throw std::invalid_argument("need equally many training features and labels");
  }
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(train_features.size()); ++i) {
    if (train_features[i].size() != query.size()) {
      throw std::invalid_argument("feature dimension mismatch");
    }
    const double dist = (train_features[i] - query).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return train_labels[best];
}

std::string EvalCache::key(const std::string& fp, const std::string& inst) {
  return fp + '\x1f' + inst;
}

std::optional<EvalOutcome> EvalCache::lookup(const std::string& fingerprint,
                                             const std::string& instance) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key(fingerprint, instance));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EvalCache::insert(const std::string& fingerprint,
                       const std::string& instance, EvalOutcome outcome) {
  std::unique_lock lock(mutex_);
  entries_[key(fingerprint, instance)] = outcome;
}

std::size_t EvalCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void EvalCache::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    EvalOutcome outcome = j["cost"].is_string() && j["cost"] == "fail"
                              ? EvalOutcome::fail()
                              : EvalOutcome::ok(j["cost"].get<double>());
    insert(j["fp"].get<std::string>(), j["instance"].get<std::string>(),
           outcome);
  }
}

void EvalCache::append_to_file(const std::string& path,
                               const std::string& fingerprint,
                               const std::string& instance,
                               EvalOutcome outcome) const {
  nlohmann::ordered_json j;
  j["fp"] = fingerprint;
  j["instance"] = instance;
  if (outcome.failed) {
    j["cost"] = "fail";
  } else {
    j["cost"] = outcome.cost;
  }
  std::ofstream out(path, std::ios::app);
  out << j.dump() << '\n';
}

}  // namespace modecfg
