#include "modecfg/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "modecfg/report.hpp"
#include "modecfg/synthetic.hpp"
#include "modecfg/worker.hpp"

namespace modecfg {

namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::vector<std::string> read_instance_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset list " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  if (ids.empty()) throw std::runtime_error("dataset list " + path + " is empty");
  return ids;
}

std::string cache_file_for(const std::string& out_dir) {
  std::string dir = out_dir;
  if (const char* env = std::getenv("MODECFG_CACHE_DIR"); env && *env) {
    dir = env;
  }
  fs::create_directories(dir);
  return (fs::path(dir) / "cache.jsonl").string();
}

namespace {

std::string run_file_name(const std::string& strategy, std::uint64_t seed) {
  return strategy + "_seed" + std::to_string(seed) + ".jsonl";
}

void write_outputs(const std::vector<RunLog>& logs, const std::string& out_dir,
                   const std::string& svg_path) {
  fs::create_directories(out_dir);
  for (const auto& log : logs) {
    log.save((fs::path(out_dir) / run_file_name(log.strategy(), log.seed()))
                 .string());
  }
  write_reports(logs, (fs::path(out_dir) / "report.csv").string(),
                (fs::path(out_dir) / "aggregate.csv").string(), svg_path);
}

}  // namespace

void write_reports(const std::vector<RunLog>& logs,
                   const std::string& trace_csv_path,
                   const std::string& aggregate_csv_path,
                   const std::string& svg_path) {
  const auto traces = compute_traces(logs);
  const auto aggregates = aggregate_traces(traces);
  write_text_file(trace_csv_path, traces_to_csv(traces));
  write_text_file(aggregate_csv_path, aggregates_to_csv(aggregates));
  if (!svg_path.empty()) {
    write_text_file(svg_path, aggregate_chart_svg(aggregates));
  }
}

std::vector<RunLog> load_run_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl" &&
        entry.path().filename() != "cache.jsonl") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no run logs found in " + dir);
  std::vector<RunLog> logs;
  logs.reserve(files.size());
  for (const auto& f : files) logs.push_back(RunLog::load(f));
  return logs;
}

int run_tune(const TuneExperiment& experiment) {
  const ParamSpace space = parse_space_file(read_text_file(experiment.space_file));
  const auto instances = read_instance_list(experiment.data_file);
  fs::create_directories(experiment.out_dir);

  WorkerEvaluator evaluator(experiment.worker_command, experiment.parallelism,
                            cache_file_for(experiment.out_dir));

  nlohmann::ordered_json problem;
  problem["kind"] = "dataset";
  problem["space"] = experiment.space_file;
  problem["data"] = experiment.data_file;

  StrategyOptions options;
  options.kind = experiment.strategy;
  options.num_partitions = experiment.num_partitions;
  options.budget = experiment.budget;
  options.method = experiment.method;
  options.warm_start = experiment.warm_start;

  std::vector<RunLog> logs;
  int failures = 0;
  for (std::uint64_t seed : experiment.seeds) {
    options.seed = seed;
    try {
      auto result = run_strategy(space, evaluator, instances, options, problem);
      logs.push_back(std::move(result.log));
    } catch (const std::exception& e) {
      std::cerr << "run " << to_string(experiment.strategy) << " seed " << seed
                << " failed: " << e.what() << "\n";
      ++failures;
    }
  }
  if (!logs.empty()) {
    write_outputs(logs, experiment.out_dir, experiment.svg_path);
  }
  return failures;
}

int run_synth(const SynthExperiment& experiment) {
  fs::create_directories(experiment.out_dir);
  std::vector<RunLog> logs;
  int failures = 0;
  for (std::uint64_t seed : experiment.seeds) {
    const SyntheticProblem problem(experiment.dimension, experiment.modes,
                                   experiment.per_mode, seed,
                                   experiment.min_center_separation);
    SyntheticEvaluator evaluator(problem);
    const ParamSpace space = problem.tuning_space(experiment.sigma0);
    const auto instances = problem.instance_ids();

    nlohmann::ordered_json descriptor;
    descriptor["kind"] = "synth";
    descriptor["dimension"] = experiment.dimension;
    descriptor["modes"] = experiment.modes;
    descriptor["per_mode"] = experiment.per_mode;
    descriptor["sigma"] = experiment.sigma0;
    descriptor["min_separation"] = experiment.min_center_separation;
    descriptor["problem_seed"] = seed;

    for (StrategyKind kind : experiment.strategies) {
      StrategyOptions options;
      options.kind = kind;
      options.num_partitions =
          kind == StrategyKind::Single ? 1 : experiment.num_partitions;
      options.budget = experiment.budget;
      options.seed = seed;
      options.method = experiment.method;
      options.warm_start = experiment.warm_start;
      try {
        auto result = run_strategy(space, evaluator, instances, options,
                                   descriptor);
        logs.push_back(std::move(result.log));
      } catch (const std::exception& e) {
        std::cerr << "run " << to_string(kind) << " seed " << seed
                  << " failed: " << e.what() << "\n";
        ++failures;
      }
    }
  }
  if (!logs.empty()) {
    write_outputs(logs, experiment.out_dir, experiment.svg_path);
  }
  return failures;
}

std::vector<Eigen::VectorXd> load_vector_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) values.push_back(std::stod(field));
    Eigen::VectorXd v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw std::runtime_error(path + " has no rows");
  return rows;
}

std::vector<int> load_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) labels.push_back(std::stoi(line));
  }
  if (labels.empty()) throw std::runtime_error(path + " has no labels");
  return labels;
}

}  // namespace modecfg
