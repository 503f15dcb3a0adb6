#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modecfg/evaluation.hpp"
#include "modecfg/experiment.hpp"
#include "modecfg/partition.hpp"
#include "modecfg/report.hpp"
#include "modecfg/strategies.hpp"

namespace {

using namespace modecfg;

int cmd_tune(const TuneExperiment& experiment) {
  return run_tune(experiment) == 0 ? 0 : 1;
}

int cmd_partition(const std::string& matrix_path, int k,
                  const std::string& method_name, const std::string& out_path) {
  const ResponseMatrix matrix =
      ResponseMatrix::from_csv(read_text_file(matrix_path));
  const Eigen::MatrixXd dense = matrix.transposed_dense();

  Partition partition;
  const PartitionMethod method = partition_method_from_string(method_name);
  switch (method) {
    case PartitionMethod::Exact:
      partition = partition_exact(dense, k);
      break;
    case PartitionMethod::Greedy:
      partition = partition_greedy(dense, k, 0, 20);
      break;
    case PartitionMethod::Kmeans:
      partition = cluster_to_partition(
          dense, kmeans_cluster(normalize_rows(dense), k, 0));
      break;
  }

  if (k == 1) {
    std::cout << "best configuration: " << matrix.row_id(partition.representatives[0])
              << " mean cost " << partition.per_group_cost[0] << "\n";
  } else {
    for (int g = 0; g < partition.k(); ++g) {
      std::cout << "partition " << g << ": ";
      if (partition.group_sizes[g] == 0) {
        std::cout << "dropped\n";
        continue;
      }
      std::cout << "config " << matrix.row_id(partition.representatives[g])
                << ", " << partition.group_sizes[g] << " instances, mean cost "
                << partition.per_group_cost[g] << "\n";
    }
    std::cout << "total cost " << partition.total_cost << " (weighted mean "
              << partition.weighted_mean() << ", K_effective "
              << partition.k_effective << ")\n";
  }

  if (!out_path.empty()) {
    std::string csv = "instance_id,partition,representative_config_id\n";
    for (int j = 0; j < matrix.num_instances(); ++j) {
      const int g = partition.assignment[j];
      csv += matrix.instance_ids()[j] + ',' + std::to_string(g) + ',' +
             matrix.row_id(partition.representatives[g]) + '\n';
    }
    write_text_file(out_path, csv);
  }
  return 0;
}

int cmd_synth(const SynthExperiment& experiment) {
  return run_synth(experiment) == 0 ? 0 : 1;
}

int cmd_report(const std::string& runs_dir, const std::string& out_csv,
               const std::string& svg_path) {
  const auto logs = load_run_dir(runs_dir);
  std::string aggregate_path = out_csv;
  const std::string suffix = ".csv";
  if (aggregate_path.size() > suffix.size() &&
      aggregate_path.ends_with(suffix)) {
    aggregate_path.resize(aggregate_path.size() - suffix.size());
  }
  aggregate_path += "_aggregate.csv";
  write_reports(logs, out_csv, aggregate_path, svg_path);
  std::cout << "wrote " << out_csv << " and " << aggregate_path << "\n";
  return 0;
}

int cmd_predict(const std::string& train_path, const std::string& labels_path,
                const std::string& query_path) {
  const auto train = load_vector_csv(train_path);
  const auto labels = load_label_file(labels_path);
  const auto queries = load_vector_csv(query_path);
  if (train.size() != labels.size()) {
    throw std::runtime_error("training features and labels differ in length");
  }
  for (const auto& q : queries) {
    std::cout << knn_predict_partition(train, labels, q) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-mode algorithm configuration tuner"};
  app.require_subcommand(1);

  TuneExperiment tune;
  std::string tune_strategy = "posthoc", tune_method = "exact";
  auto* tune_cmd =
      app.add_subcommand("tune", "Tune an external algorithm via workers");
  tune_cmd->add_option("--space", tune.space_file, "Parameter space JSON file")
      ->required();
  tune_cmd->add_option("--worker", tune.worker_command, "Worker command line")
      ->required();
  tune_cmd->add_option("--data", tune.data_file, "Instance list, one id per line")
      ->required();
  tune_cmd->add_option("--strategy", tune_strategy,
                       "single|posthoc|staged|online");
  tune_cmd->add_option("-k,--partitions", tune.num_partitions,
                       "Number of partitions");
  tune_cmd->add_option("--budget", tune.budget.max_iterations,
                       "Optimizer generations")
      ->required();
  tune_cmd->add_option("--seeds", tune.seeds, "Run seeds")->required();
  tune_cmd->add_option("--out", tune.out_dir, "Output directory")->required();
  tune_cmd->add_option("--partition-method", tune_method,
                       "exact|greedy|kmeans");
  tune_cmd->add_flag("--warm-start", tune.warm_start,
                     "Staged: start group optimizers from their representative");
  tune_cmd->add_option("--parallel", tune.parallelism, "Worker processes");
  tune_cmd->add_option("--explore-fraction", tune.budget.explore_fraction,
                       "Staged explore share of the budget");
  tune_cmd->add_option("--svg", tune.svg_path, "Write an SVG convergence chart");

  std::string part_matrix, part_method = "exact", part_out;
  int part_k = 2;
  auto* part_cmd =
      app.add_subcommand("partition", "Partition a precomputed cost matrix");
  part_cmd->add_option("--matrix", part_matrix, "Matrix CSV file")->required();
  part_cmd->add_option("-k,--partitions", part_k, "Number of partitions");
  part_cmd->add_option("--method", part_method, "exact|kmeans|greedy");
  part_cmd->add_option("--out", part_out, "Write per-instance assignment CSV");

  SynthExperiment synth;
  std::vector<std::string> synth_strategies = {"single", "posthoc", "staged",
                                               "online"};
  std::string synth_method = "exact";
  auto* synth_cmd =
      app.add_subcommand("synth", "Benchmark strategies on synthetic modes");
  synth_cmd->add_option("--dim", synth.dimension, "Problem dimension")
      ->required();
  synth_cmd->add_option("--modes", synth.modes, "Generated modes")->required();
  synth_cmd->add_option("--per-mode", synth.per_mode, "Instances per mode")
      ->required();
  synth_cmd->add_option("--budget", synth.budget.max_iterations,
                        "Optimizer generations")
      ->required();
  synth_cmd->add_option("--seeds", synth.seeds, "Run seeds")->required();
  synth_cmd->add_option("--strategies", synth_strategies,
                        "Subset of single posthoc staged online");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("-k,--partitions", synth.num_partitions,
                        "Partitions for the discovery strategies");
  synth_cmd->add_option("--partition-method", synth_method,
                        "exact|greedy|kmeans");
  synth_cmd->add_option("--sigma", synth.sigma0, "Initial step size");
  synth_cmd->add_option("--min-separation", synth.min_center_separation,
                        "Redraw mode centers until this far apart");
  synth_cmd->add_flag("--warm-start", synth.warm_start,
                      "Staged: warm-start group optimizers");
  synth_cmd->add_option("--svg", synth.svg_path, "Write an SVG convergence chart");

  std::string report_runs, report_out, report_svg;
  auto* report_cmd =
      app.add_subcommand("report", "Recompute reports from run logs");
  report_cmd->add_option("--runs", report_runs, "Directory of .jsonl run logs")
      ->required();
  report_cmd->add_option("--out", report_out, "Trace CSV path")->required();
  report_cmd->add_option("--svg", report_svg, "SVG chart path");

  std::string pred_train, pred_labels, pred_query;
  auto* pred_cmd = app.add_subcommand(
      "predict", "1-nearest-neighbor partition prediction from features");
  pred_cmd->add_option("--train-features", pred_train, "Training feature CSV")
      ->required();
  pred_cmd->add_option("--labels", pred_labels, "Training labels, one per line")
      ->required();
  pred_cmd->add_option("--query", pred_query, "Query feature CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*tune_cmd) {
      tune.strategy = strategy_from_string(tune_strategy);
      tune.method = partition_method_from_string(tune_method);
      if (tune.strategy == StrategyKind::Single && tune.num_partitions != 1 &&
          tune_cmd->count("-k")) {
        std::cerr << "usage error: strategy 'single' requires -k 1\n";
        return 2;
      }
      if (tune.strategy == StrategyKind::Single) tune.num_partitions = 1;
      if (tune.strategy != StrategyKind::Single && tune.num_partitions < 2) {
        std::cerr << "usage error: partition strategies need -k >= 2\n";
        return 2;
      }
      return cmd_tune(tune);
    }
    if (*part_cmd) return cmd_partition(part_matrix, part_k, part_method, part_out);
    if (*synth_cmd) {
      synth.method = partition_method_from_string(synth_method);
      synth.strategies.clear();
      for (const auto& s : synth_strategies) {
        synth.strategies.push_back(strategy_from_string(s));
      }
      return cmd_synth(synth);
    }
    if (*report_cmd) return cmd_report(report_runs, report_out, report_svg);
    if (*pred_cmd) return cmd_predict(pred_train, pred_labels, pred_query);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
