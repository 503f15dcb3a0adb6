#include "modecfg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace modecfg {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double observed_cost(const Cell& c, double penalty) {
  switch (c.state) {
    case CellState::Ok: return c.value;
    case CellState::Failed: return penalty;
    case CellState::Missing: break;
  }
  throw std::logic_error("trace touched an unobserved cell");
}

double row_mean(const ResponseMatrix& m, int row, const std::vector<int>& subset,
                double penalty) {
  double sum = 0.0;
  for (int j : subset) sum += observed_cost(m.cell(row, j), penalty);
  return sum / static_cast<double>(subset.size());
}

/// Per-run replay that turns records into "answer if stopped now" costs.
class TraceReplayer {
 public:
  explicit TraceReplayer(const RunLog& log)
      : log_(log), matrix_(log.instances()), n_(log.instances().size()) {
    all_.resize(n_);
    std::iota(all_.begin(), all_.end(), 0);
  }

  std::vector<std::pair<double, double>> run() {  // (iteration, cost)
    std::vector<std::pair<double, double>> out;
    for (const auto& rec : log_.records()) {
      const double value = process(rec);
      out.emplace_back(static_cast<double>(rec.evals) / n_, value);
    }
    return out;
  }

  const ResponseMatrix& matrix() const { return matrix_; }

 private:
  double process(const LogRecord& rec) {
    std::vector<int> rows;
    rows.reserve(rec.candidates.size());
    for (const auto& cand : rec.candidates) {
      const int row = matrix_.upsert_config(cand.config);
      rows.push_back(row);
      for (const auto& [instance, outcome] : cand.costs) {
        matrix_.set_cell(row, matrix_.instance_index(instance), outcome);
      }
    }
    const double penalty = matrix_.failure_penalty();

    if (rec.phase == "explore" || rec.phase == "init") {
      for (int row : rows) {
        running_best_ =
            std::min(running_best_, row_mean(matrix_, row, all_, penalty));
      }
      if (rec.phase == "init") init_arms(rows, penalty);
      return running_best_;
    }
    if (rec.phase == "online") return online_step(rec, penalty);
    if (rec.phase == "partition") return partition_step(rec, penalty);
    if (rec.phase == "exploit") return exploit_step(rec, rows, penalty);
    if (rec.phase == "final") return final_step(rec, penalty);
    throw std::invalid_argument("unknown record phase '" + rec.phase + "'");
  }

  void init_arms(const std::vector<int>& rows, double penalty) {
    arm_mean_.assign(n_, {});
    arm_count_.assign(n_, {});
    for (int j = 0; j < n_; ++j) {
      double sum = 0.0;
      for (int row : rows) sum += observed_cost(matrix_.cell(row, j), penalty);
      const double mean = sum / rows.size();
      arm_mean_[j].assign(max_arms_, mean);
      arm_count_[j].assign(max_arms_, 1);
    }
  }

  double online_step(const LogRecord& rec, double penalty) {
    for (const auto& cand : rec.candidates) {
      if (cand.costs.empty()) continue;
      const int first = matrix_.instance_index(cand.costs.front().first);
      const int g = rec.assignment.at(first);
      grow_arms(g + 1);
      for (const auto& [instance, outcome] : cand.costs) {
        const int j = matrix_.instance_index(instance);
        const double cost = outcome.failed ? penalty : outcome.cost;
        arm_mean_[j][g] = (arm_mean_[j][g] * arm_count_[j][g] + cost) /
                          (arm_count_[j][g] + 1);
        ++arm_count_[j][g];
      }
    }
    double sum = 0.0;
    for (int j = 0; j < n_; ++j) {
      sum += *std::min_element(arm_mean_[j].begin(), arm_mean_[j].end());
    }
    return sum / n_;
  }

  std::vector<int> rep_rows(const LogRecord& rec) const {
    std::vector<int> reps;
    for (const auto& id : rec.representatives) {
      if (id.empty()) {
        reps.push_back(-1);
        continue;
      }
      int found = -1;
      for (int r = 0; r < matrix_.num_configs(); ++r) {
        if (matrix_.row_id(r) == id) {
          found = r;
          break;
        }
      }
      if (found < 0) throw std::invalid_argument("unknown representative row " + id);
      reps.push_back(found);
    }
    return reps;
  }

  double assigned_cost(const std::vector<int>& assignment,
                       const std::vector<int>& reps, double penalty) const {
    double sum = 0.0;
    for (int j = 0; j < n_; ++j) {
      sum += observed_cost(matrix_.cell(reps.at(assignment[j]), j), penalty);
    }
    return sum / n_;
  }

  double partition_step(const LogRecord& rec, double penalty) {
    assignment_ = rec.assignment;
    const auto reps = rep_rows(rec);
    const int k = static_cast<int>(reps.size());
    members_.assign(k, {});
    for (int j = 0; j < n_; ++j) members_[assignment_[j]].push_back(j);

    // Seed per-group running bests from every row already measured on the
    // whole group, so later exploitation never reports a regression.
    group_best_.assign(k, std::numeric_limits<double>::infinity());
    for (int g = 0; g < k; ++g) {
      if (members_[g].empty()) continue;
      for (int r = 0; r < matrix_.num_configs(); ++r) {
        if (!matrix_.row_complete_on(r, members_[g])) continue;
        group_best_[g] =
            std::min(group_best_[g], row_mean(matrix_, r, members_[g], penalty));
      }
    }
    return assigned_cost(assignment_, reps, penalty);
  }

  double exploit_step(const LogRecord& rec, const std::vector<int>& rows,
                      double penalty) {
    const int g = rec.group;
    for (int row : rows) {
      group_best_[g] =
          std::min(group_best_[g], row_mean(matrix_, row, members_[g], penalty));
    }
    double sum = 0.0;
    for (std::size_t gg = 0; gg < members_.size(); ++gg) {
      sum += group_best_[gg] * members_[gg].size();
    }
    return sum / n_;
  }

  double final_step(const LogRecord& rec, double penalty) {
    return assigned_cost(rec.assignment, rep_rows(rec), penalty);
  }

  void grow_arms(int k) {
    if (k <= max_arms_) return;
    max_arms_ = k;
    for (int j = 0; j < n_; ++j) {
      const double mean = arm_mean_[j].empty() ? 0.0 : arm_mean_[j].front();
      arm_mean_[j].resize(k, mean);
      arm_count_[j].resize(k, 1);
    }
  }

  const RunLog& log_;
  ResponseMatrix matrix_;
  int n_;
  std::vector<int> all_;
  double running_best_ = std::numeric_limits<double>::infinity();

  std::vector<int> assignment_;
  std::vector<std::vector<int>> members_;
  std::vector<double> group_best_;

  int max_arms_ = 1;
  std::vector<std::vector<double>> arm_mean_;
  std::vector<std::vector<int>> arm_count_;
};

}  // namespace

std::vector<TraceRow> compute_traces(const std::vector<RunLog>& logs) {
  // Oracles merge every loaded run of the same problem.
  std::map<std::string, std::vector<const RunLog*>> by_problem;
  for (const auto& log : logs) by_problem[log.problem().dump()].push_back(&log);

  std::map<const RunLog*, double> oracle_mean;
  for (const auto& [key, group] : by_problem) {
    ResponseMatrix merged(group.front()->instances());
    for (const RunLog* log : group) merged.merge(log->replay_matrix());
    const auto oracle = merged.oracle_per_datum();
    const double mean =
        std::accumulate(oracle.begin(), oracle.end(), 0.0) / oracle.size();
    for (const RunLog* log : group) oracle_mean[log] = mean;
  }

  std::vector<TraceRow> rows;
  for (const auto& log : logs) {
    TraceReplayer replayer(log);
    const auto trace = replayer.run();
    const double init_cost = replayer.matrix().mean_per_config()[0];
    const double oracle = oracle_mean.at(&log);
    for (const auto& [iteration, cost] : trace) {
      TraceRow row;
      row.strategy = log.strategy();
      row.seed = log.seed();
      row.iteration = iteration;
      row.best_mean_cost = cost;
      if (init_cost > oracle) {
        row.score = normalized_score(cost, init_cost, oracle);
      }
      rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TraceRow& a,
                                                const TraceRow& b) {
    if (a.strategy != b.strategy) return a.strategy < b.strategy;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.iteration < b.iteration;
  });
  return rows;
}

std::vector<AggregateRow> aggregate_traces(const std::vector<TraceRow>& rows) {
  std::map<std::pair<std::string, double>, std::vector<const TraceRow*>> cells;
  for (const auto& row : rows) {
    cells[{row.strategy, row.iteration}].push_back(&row);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, group] : cells) {
    AggregateRow agg;
    agg.strategy = key.first;
    agg.iteration = key.second;
    agg.runs = static_cast<int>(group.size());

    auto mean_sem = [&](auto getter) -> std::pair<double, double> {
      double sum = 0.0;
      for (const TraceRow* r : group) sum += getter(*r);
      const double mean = sum / group.size();
      if (group.size() < 2) return {mean, 0.0};
      double var = 0.0;
      for (const TraceRow* r : group) {
        var += (getter(*r) - mean) * (getter(*r) - mean);
      }
      var /= (group.size() - 1);
      return {mean, std::sqrt(var / group.size())};
    };

    std::tie(agg.mean_cost, agg.sem_cost) =
        mean_sem([](const TraceRow& r) { return r.best_mean_cost; });
    const bool all_scored = std::all_of(
        group.begin(), group.end(),
        [](const TraceRow* r) { return r->score.has_value(); });
    if (all_scored) {
      auto [m, s] = mean_sem([](const TraceRow& r) { return *r.score; });
      agg.mean_score = m;
      agg.sem_score = s;
    }
    out.push_back(std::move(agg));
  }
  return out;
}

std::string traces_to_csv(const std::vector<TraceRow>& rows) {
  std::string out = "strategy,seed,iteration,best_mean_cost,normalized_score\n";
  for (const auto& r : rows) {
    out += r.strategy + ',' + std::to_string(r.seed) + ',' + fmt(r.iteration) +
           ',' + fmt(r.best_mean_cost) + ',';
    if (r.score) out += fmt(*r.score);
    out += '\n';
  }
  return out;
}

std::string aggregates_to_csv(const std::vector<AggregateRow>& rows) {
  std::string out =
      "strategy,iteration,mean_best_cost,sem_best_cost,mean_normalized_score,"
      "sem_normalized_score,runs\n";
  for (const auto& r : rows) {
    out += r.strategy + ',' + fmt(r.iteration) + ',' + fmt(r.mean_cost) + ',' +
           fmt(r.sem_cost) + ',';
    if (r.mean_score) out += fmt(*r.mean_score);
    out += ',';
    if (r.sem_score) out += fmt(*r.sem_score);
    out += ',' + std::to_string(r.runs) + '\n';
  }
  return out;
}

std::string aggregate_chart_svg(const std::vector<AggregateRow>& rows) {
  constexpr double kWidth = 720, kHeight = 420;
  constexpr double kLeft = 60, kRight = 20, kTop = 20, kBottom = 45;
  const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b"};

  std::map<std::string, std::vector<const AggregateRow*>> series;
  double x_max = 1.0, y_max = 1.0;
  for (const auto& r : rows) {
    if (!r.mean_score) continue;
    series[r.strategy].push_back(&r);
    x_max = std::max(x_max, r.iteration);
    y_max = std::max(y_max, *r.mean_score);
  }
  y_max *= 1.05;

  auto sx = [&](double x) {
    return kLeft + (kWidth - kLeft - kRight) * (x / x_max);
  };
  auto sy = [&](double y) {
    return kHeight - kBottom - (kHeight - kTop - kBottom) * (y / y_max);
  };

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
      fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kHeight - kBottom) +
         "\" x2=\"" + fmt(kWidth - kRight) + "\" y2=\"" +
         fmt(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" +
         fmt(kLeft) + "\" y2=\"" + fmt(kHeight - kBottom) +
         "\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text,
                   const std::string& anchor) {
    return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) +
           "\" font-size=\"12\" text-anchor=\"" + anchor + "\">" + text +
           "</text>\n";
  };
  svg += label(kLeft, kHeight - kBottom + 16, "0", "middle");
  svg += label(kWidth - kRight, kHeight - kBottom + 16, fmt(x_max), "middle");
  svg += label(kLeft - 6, kHeight - kBottom + 4, "0", "end");
  svg += label(kLeft - 6, kTop + 10, fmt(y_max), "end");
  svg += label((kLeft + kWidth - kRight) / 2, kHeight - 10, "dataset passes",
               "middle");
  svg += "<text x=\"14\" y=\"" + fmt((kTop + kHeight - kBottom) / 2) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fmt((kTop + kHeight - kBottom) / 2) +
         ")\">normalized score</text>\n";

  int color = 0;
  double legend_y = kTop + 12;
  for (const auto& [name, pts] : series) {
    const std::string c = kColors[color % 6];
    std::string poly = "<polyline fill=\"none\" stroke=\"" + c +
                       "\" stroke-width=\"1.5\" points=\"";
    for (const auto* r : pts) {
      poly += fmt(sx(r->iteration)) + "," + fmt(sy(*r->mean_score)) + " ";
    }
    poly += "\"/>\n";
    svg += poly;
    svg += "<line x1=\"" + fmt(kWidth - kRight - 110) + "\" y1=\"" +
           fmt(legend_y - 4) + "\" x2=\"" + fmt(kWidth - kRight - 90) +
           "\" y2=\"" + fmt(legend_y - 4) + "\" stroke=\"" + c +
           "\" stroke-width=\"2\"/>\n";
    svg += label(kWidth - kRight - 84, legend_y, name, "start");
    legend_y += 16;
    ++color;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace modecfg
