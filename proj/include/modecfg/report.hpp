#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modecfg/run_log.hpp"

namespace modecfg {

/// One point of a run's convergence trace. `iteration` counts dataset passes
/// (cumulative instance evaluations / N), so strategies with different
/// generation shapes share an axis. `score` is the normalized cost against
/// the run's initial configuration and the oracle merged over every loaded
/// run of the same problem; absent when that scale is degenerate.
struct TraceRow {
  std::string strategy;
  std::uint64_t seed = 0;
  double iteration = 0.0;
  double best_mean_cost = 0.0;
  std::optional<double> score;
};

struct AggregateRow {
  std::string strategy;
  double iteration = 0.0;
  double mean_cost = 0.0;
  double sem_cost = 0.0;
  std::optional<double> mean_score;
  std::optional<double> sem_score;
  int runs = 0;
};

/// Replays every run and computes its trace. Oracles are merged across runs
/// that share a problem descriptor, per the header.
std::vector<TraceRow> compute_traces(const std::vector<RunLog>& logs);

/// Mean and standard error over seeds per (strategy, iteration).
std::vector<AggregateRow> aggregate_traces(const std::vector<TraceRow>& rows);

std::string traces_to_csv(const std::vector<TraceRow>& rows);
std::string aggregates_to_csv(const std::vector<AggregateRow>& rows);

/// Minimal SVG line chart of mean normalized score per strategy.
std::string aggregate_chart_svg(const std::vector<AggregateRow>& rows);

}  // namespace modecfg
