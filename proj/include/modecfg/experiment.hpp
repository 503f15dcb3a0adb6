#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "modecfg/run_log.hpp"
#include "modecfg/strategies.hpp"

namespace modecfg {

/// Tunes an external algorithm through the worker protocol: one run per seed,
/// one RunLog file per run, plus trace/aggregate CSVs.
struct TuneExperiment {
  std::string space_file;
  std::string worker_command;
  std::string data_file;  // one instance id per line
  std::string out_dir;
  StrategyKind strategy = StrategyKind::Posthoc;
  int num_partitions = 2;
  Budget budget;
  std::vector<std::uint64_t> seeds;
  PartitionMethod method = PartitionMethod::Exact;
  bool warm_start = false;
  int parallelism = 1;
  std::string svg_path;  // empty = no chart
};

/// Benchmarks the strategies on a generated multi-mode problem, one fresh
/// problem per seed.
struct SynthExperiment {
  int dimension = 2;
  int modes = 2;
  int per_mode = 10;
  double sigma0 = 1.0;
  double min_center_separation = 0.0;
  std::string out_dir;
  int num_partitions = 2;
  Budget budget;
  std::vector<std::uint64_t> seeds;
  std::vector<StrategyKind> strategies;
  PartitionMethod method = PartitionMethod::Exact;
  bool warm_start = false;
  std::string svg_path;
};

/// Returns the number of failed runs; completed runs are written regardless.
int run_tune(const TuneExperiment& experiment);
int run_synth(const SynthExperiment& experiment);

/// Recomputes trace and aggregate CSVs (and optionally the SVG chart) from
/// the RunLogs found in a directory (*.jsonl).
void write_reports(const std::vector<RunLog>& logs,
                   const std::string& trace_csv_path,
                   const std::string& aggregate_csv_path,
                   const std::string& svg_path = "");
std::vector<RunLog> load_run_dir(const std::string& dir);

/// Resolved evaluation-cache file for an output directory; honors the
/// MODECFG_CACHE_DIR environment variable.
std::string cache_file_for(const std::string& out_dir);

std::vector<std::string> read_instance_list(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Headerless CSV of doubles, one vector per line.
std::vector<Eigen::VectorXd> load_vector_csv(const std::string& path);
/// One integer label per line.
std::vector<int> load_label_file(const std::string& path);

}  // namespace modecfg
