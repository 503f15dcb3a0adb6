#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modecfg/evaluation.hpp"
#include "modecfg/param_space.hpp"

namespace modecfg {

/// One candidate configuration evaluated within a record, with the observed
/// per-instance costs in evaluation order.
struct CandidateRecord {
  std::string row_id;
  Configuration config;
  std::vector<std::pair<std::string, EvalOutcome>> costs;
};

/// One append-only history entry. `iteration` is a strictly increasing record
/// counter; `evals` is the cumulative number of requested (config, instance)
/// evaluations after this record, cache hits included.
struct LogRecord {
  std::int64_t iteration = 0;
  std::int64_t evals = 0;
  std::string phase;  // init | explore | exploit | online | partition | final
  int group = -1;     // optimizer / partition index where applicable
  std::vector<CandidateRecord> candidates;
  std::vector<int> assignment;  // partition snapshot; empty when none
  std::vector<std::string> representatives;  // per-group row ids; "" if dropped
};

/// Replayable record of one tuning run: the header pins strategy, seed,
/// instance order and the problem descriptor; records carry every evaluation.
/// Serialized as UTF-8 JSONL, one object per line, LF-terminated. A RunLog
/// alone reconstructs the run's ResponseMatrix bit-exactly.
class RunLog {
 public:
  RunLog() = default;
  RunLog(std::string strategy, std::uint64_t seed,
         std::vector<std::string> instances, nlohmann::ordered_json problem);

  const std::string& strategy() const { return strategy_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::string>& instances() const { return instances_; }
  const nlohmann::ordered_json& problem() const { return problem_; }
  const std::vector<LogRecord>& records() const { return records_; }

  /// Appends a record; iterations must be strictly increasing.
  void append(LogRecord record);

  /// Mutable access to the newest record, for annotations decided after the
  /// fact (e.g. which evaluated rows became group representatives).
  LogRecord& last_record();

  ResponseMatrix replay_matrix() const;

  std::string to_jsonl() const;
  static RunLog from_jsonl(const std::string& text);

  void save(const std::string& path) const;
  static RunLog load(const std::string& path);

 private:
  std::string strategy_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> instances_;
  nlohmann::ordered_json problem_;
  std::vector<LogRecord> records_;
};

}  // namespace modecfg
