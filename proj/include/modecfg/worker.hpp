#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modecfg/evaluation.hpp"
#include "modecfg/param_space.hpp"

namespace modecfg {

/// Pool of external worker processes speaking the line-delimited JSON
/// evaluation protocol over stdin/stdout:
///
///   handshake:  -> {"hello":1}            <- {"hello":1}
///   request:    -> {"id":7,"instance":"a","config":{"p":1.5}}
///   response:   <- {"id":7,"cost":0.25}   or   {"id":7,"cost":"fail"}
///
/// One line per message, LF-terminated, UTF-8, flushed per line. Responses
/// may arrive out of order; they are matched by id. A crashed worker fails
/// its outstanding requests and is restarted, at most `max_restarts` times
/// per pool. A protocol violation (unknown id, malformed line) aborts the
/// run with the offending line.
class WorkerPool {
 public:
  WorkerPool(std::string command, int num_workers, int max_outstanding = 0,
             int max_restarts = 3);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  struct Request {
    std::string instance;
    Configuration config;
  };

  /// Sends every request (one per instance), joins all responses.
  std::vector<EvalOutcome> run(const std::vector<Request>& requests);

  int restarts_used() const { return restarts_used_; }

 private:
  struct Worker {
    int pid = -1;
    int to_fd = -1;
    int from_fd = -1;
    std::string buffer;
    bool awaiting_hello = true;
    std::map<std::uint64_t, int> outstanding;  // request id -> slot index
  };

  void spawn(Worker& worker);
  void handle_crash(Worker& worker, std::vector<EvalOutcome>& results,
                    std::vector<char>& done, int& remaining);
  void shutdown();

  std::string command_;
  int max_outstanding_;
  int max_restarts_;
  int restarts_used_ = 0;
  std::uint64_t next_id_ = 1;
  std::vector<Worker> workers_;
};

/// Evaluator backed by a WorkerPool with an EvalCache in front; cache hits
/// never reach a worker. When a cache file path is given the cache is loaded
/// from it and new outcomes are appended, making warm reruns byte-identical.
class WorkerEvaluator : public Evaluator {
 public:
  WorkerEvaluator(std::string command, int parallelism,
                  std::optional<std::string> cache_file = std::nullopt);

  std::vector<std::vector<EvalOutcome>> evaluate(
      const std::vector<EvalTask>& tasks) override;

  const EvalCache& cache() const { return cache_; }
  WorkerPool& pool() { return pool_; }

 private:
  WorkerPool pool_;
  EvalCache cache_;
  std::optional<std::string> cache_file_;
};

}  // namespace modecfg
