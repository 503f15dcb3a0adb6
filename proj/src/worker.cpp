#include "modecfg/worker.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

namespace modecfg {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void protocol_violation(const std::string& why,
                                     const std::string& line) {
  throw std::runtime_error("worker protocol violation (" + why +
                           "): offending line: " + line);
}

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("write to worker failed: ") +
                               std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

WorkerPool::WorkerPool(std::string command, int num_workers,
                       int max_outstanding, int max_restarts)
    : command_(std::move(command)),
      max_outstanding_(max_outstanding > 0 ? max_outstanding : num_workers),
      max_restarts_(max_restarts) {
  if (num_workers < 1) throw std::invalid_argument("need at least one worker");
  ::signal(SIGPIPE, SIG_IGN);
  workers_.resize(num_workers);
  for (auto& w : workers_) spawn(w);
}

WorkerPool::~WorkerPool() { shutdown(); }

void WorkerPool::spawn(Worker& worker) {
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw std::runtime_error("cannot create worker pipes");
  }
  const int pid = ::fork();
  if (pid < 0) throw std::runtime_error("cannot fork worker");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), (char*)nullptr);
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  worker.pid = pid;
  worker.to_fd = to_child[1];
  worker.from_fd = from_child[0];
  worker.buffer.clear();
  worker.awaiting_hello = true;
  worker.outstanding.clear();
  write_all(worker.to_fd, "{\"hello\":1}\n");
}

void WorkerPool::handle_crash(Worker& worker, std::vector<EvalOutcome>& results,
                              std::vector<char>& done, int& remaining) {
  for (const auto& [id, slot] : worker.outstanding) {
    if (!done[slot]) {
      results[slot] = EvalOutcome::fail();
      done[slot] = 1;
      --remaining;
    }
  }
  worker.outstanding.clear();
  ::close(worker.to_fd);
  ::close(worker.from_fd);
  worker.to_fd = worker.from_fd = -1;
  int status = 0;
  ::waitpid(worker.pid, &status, 0);
  worker.pid = -1;
  if (restarts_used_ >= max_restarts_) {
    throw std::runtime_error("worker crashed and the restart limit (" +
                             std::to_string(max_restarts_) + ") is exhausted");
  }
  ++restarts_used_;
  spawn(worker);
}

std::vector<EvalOutcome> WorkerPool::run(const std::vector<Request>& requests) {
  std::vector<EvalOutcome> results(requests.size());
  std::vector<char> done(requests.size(), 0);
  int remaining = static_cast<int>(requests.size());
  std::size_t next_request = 0;

  while (remaining > 0) {
    // Dispatch to hello'd workers, fewest in-flight first, honoring the
    // outstanding bound.
    int outstanding = 0;
    for (const auto& w : workers_) {
      outstanding += static_cast<int>(w.outstanding.size());
    }
    while (next_request < requests.size() && outstanding < max_outstanding_) {
      Worker* target = nullptr;
      for (auto& w : workers_) {
        if (w.awaiting_hello) continue;
        if (!target || w.outstanding.size() < target->outstanding.size()) {
          target = &w;
        }
      }
      if (!target) break;
      const std::uint64_t id = next_id_++;
      ordered_json j;
      j["id"] = id;
      j["instance"] = requests[next_request].instance;
      j["config"] = requests[next_request].config.values;
      target->outstanding.emplace(id, static_cast<int>(next_request));
      ++next_request;
      ++outstanding;
      try {
        write_all(target->to_fd, j.dump() + "\n");
      } catch (const std::runtime_error&) {
        handle_crash(*target, results, done, remaining);
      }
    }

    std::vector<pollfd> fds;
    fds.reserve(workers_.size());
    for (const auto& w : workers_) {
      fds.push_back({w.from_fd, POLLIN, 0});
    }
    const int rc = ::poll(fds.data(), fds.size(), -1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("poll on worker pool failed");
    }

    for (std::size_t wi = 0; wi < workers_.size(); ++wi) {
      Worker& w = workers_[wi];
      if (!(fds[wi].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      char buf[4096];
      const ssize_t n = ::read(w.from_fd, buf, sizeof(buf));
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        handle_crash(w, results, done, remaining);
        continue;
      }
      if (n == 0) {
        handle_crash(w, results, done, remaining);
        continue;
      }
      w.buffer.append(buf, static_cast<std::size_t>(n));
      std::size_t pos;
      while ((pos = w.buffer.find('\n')) != std::string::npos) {
        const std::string line = w.buffer.substr(0, pos);
        w.buffer.erase(0, pos + 1);
        if (line.empty()) continue;
        ordered_json j;
        try {
          j = ordered_json::parse(line);
        } catch (const ordered_json::parse_error&) {
          protocol_violation("malformed line", line);
        }
        if (w.awaiting_hello) {
          if (!j.is_object() || j.value("hello", 0) != 1) {
            protocol_violation("expected handshake reply", line);
          }
          w.awaiting_hello = false;
          continue;
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("cost")) {
          protocol_violation("response needs id and cost", line);
        }
        const auto id = j["id"].get<std::uint64_t>();
        auto it = w.outstanding.find(id);
        if (it == w.outstanding.end()) {
          protocol_violation("unknown id", line);
        }
        const int slot = it->second;
        w.outstanding.erase(it);
        EvalOutcome outcome;
        if (j["cost"].is_string()) {
          if (j["cost"].get<std::string>() != "fail") {
            protocol_violation("cost must be a number or \"fail\"", line);
          }
          outcome = EvalOutcome::fail();
        } else if (j["cost"].is_number()) {
          const double c = j["cost"].get<double>();
          outcome = std::isfinite(c) ? EvalOutcome::ok(c) : EvalOutcome::fail();
        } else {
          protocol_violation("cost must be a number or \"fail\"", line);
        }
        if (!done[slot]) {
          results[slot] = outcome;
          done[slot] = 1;
          --remaining;
        }
      }
    }
  }
  return results;
}

void WorkerPool::shutdown() {
  for (auto& w : workers_) {
    if (w.to_fd >= 0) ::close(w.to_fd);
    if (w.from_fd >= 0) ::close(w.from_fd);
  }
  for (auto& w : workers_) {
    if (w.pid <= 0) continue;
    int status = 0;
    for (int tries = 0; tries < 50; ++tries) {
      if (::waitpid(w.pid, &status, WNOHANG) != 0) {
        w.pid = -1;
        break;
      }
      ::usleep(20 * 1000);
    }
    if (w.pid > 0) {
      ::kill(w.pid, SIGKILL);
      ::waitpid(w.pid, &status, 0);
      w.pid = -1;
    }
  }
}

WorkerEvaluator::WorkerEvaluator(std::string command, int parallelism,
                                 std::optional<std::string> cache_file)
    : pool_(std::move(command), parallelism),
      cache_file_(std::move(cache_file)) {
  if (cache_file_) cache_.load_file(*cache_file_);
}

std::vector<std::vector<EvalOutcome>> WorkerEvaluator::evaluate(
    const std::vector<EvalTask>& tasks) {
  std::vector<std::vector<EvalOutcome>> results(tasks.size());

  struct Slot {
    std::size_t task;
    std::size_t instance;
  };
  std::vector<WorkerPool::Request> requests;
  std::vector<std::string> request_fps;
  std::map<std::string, std::vector<Slot>> waiting;  // key -> result slots

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const std::string fp = tasks[t].config.fingerprint();
    results[t].resize(tasks[t].instances.size());
    for (std::size_t u = 0; u < tasks[t].instances.size(); ++u) {
      const std::string& instance = tasks[t].instances[u];
      if (auto hit = cache_.lookup(fp, instance)) {
        results[t][u] = *hit;
        continue;
      }
      const std::string key = fp + '\x1f' + instance;
      auto [it, fresh] = waiting.try_emplace(key);
      it->second.push_back({t, u});
      if (fresh) {
        requests.push_back({instance, tasks[t].config});
        request_fps.push_back(fp);
      }
    }
  }

  if (!requests.empty()) {
    const auto outcomes = pool_.run(requests);
    for (std::size_t r = 0; r < requests.size(); ++r) {
      const std::string key = request_fps[r] + '\x1f' + requests[r].instance;
      for (const Slot& slot : waiting.at(key)) {
        results[slot.task][slot.instance] = outcomes[r];
      }
      cache_.insert(request_fps[r], requests[r].instance, outcomes[r]);
      if (cache_file_) {
        cache_.append_to_file(*cache_file_, request_fps[r],
                              requests[r].instance, outcomes[r]);
      }
    }
  }
  return results;
}

}  // namespace modecfg
