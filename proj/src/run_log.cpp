#include "modecfg/run_log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace modecfg {

using nlohmann::ordered_json;

RunLog::RunLog(std::string strategy, std::uint64_t seed,
               std::vector<std::string> instances, ordered_json problem)
    : strategy_(std::move(strategy)),
      seed_(seed),
      instances_(std::move(instances)),
      problem_(std::move(problem)) {}

void RunLog::append(LogRecord record) {
  if (!records_.empty() && record.iteration <= records_.back().iteration) {
    throw std::invalid_argument("run log iterations must strictly increase");
  }
  records_.push_back(std::move(record));
}

LogRecord& RunLog::last_record() {
  if (records_.empty()) throw std::logic_error("run log has no records");
  return records_.back();
}

ResponseMatrix RunLog::replay_matrix() const {
  ResponseMatrix m(instances_);
  for (const auto& rec : records_) {
    for (const auto& cand : rec.candidates) {
      const int row = m.upsert_config(cand.config);
      for (const auto& [instance, outcome] : cand.costs) {
        m.set_cell(row, m.instance_index(instance), outcome);
      }
    }
  }
  return m;
}

namespace {

ordered_json outcome_to_json(const EvalOutcome& o) {
  if (o.failed) return "fail";
  return o.cost;
}

EvalOutcome outcome_from_json(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "fail") return EvalOutcome::fail();
    throw std::invalid_argument("bad cost value in run log");
  }
  return EvalOutcome::ok(j.get<double>());
}

}  // namespace

std::string RunLog::to_jsonl() const {
  std::string out;
  ordered_json header;
  header["header"] = 1;
  header["strategy"] = strategy_;
  header["seed"] = seed_;
  header["instances"] = instances_;
  header["problem"] = problem_;
  out += header.dump();
  out += '\n';
  for (const auto& rec : records_) {
    ordered_json j;
    j["iteration"] = rec.iteration;
    j["strategy"] = strategy_;
    j["seed"] = seed_;
    j["evals"] = rec.evals;
    j["phase"] = rec.phase;
    if (rec.group >= 0) j["group"] = rec.group;
    ordered_json cands = ordered_json::array();
    for (const auto& cand : rec.candidates) {
      ordered_json c;
      c["id"] = cand.row_id;
      c["config"] = cand.config.values;
      ordered_json costs = ordered_json::array();
      for (const auto& [instance, outcome] : cand.costs) {
        costs.push_back(ordered_json::array({instance, outcome_to_json(outcome)}));
      }
      c["costs"] = std::move(costs);
      cands.push_back(std::move(c));
    }
    j["candidates"] = std::move(cands);
    if (!rec.assignment.empty()) j["assignment"] = rec.assignment;
    if (!rec.representatives.empty()) j["reps"] = rec.representatives;
    out += j.dump();
    out += '\n';
  }
  return out;
}

RunLog RunLog::from_jsonl(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) {
    throw std::invalid_argument("run log is empty");
  }
  ordered_json header = ordered_json::parse(line);
  if (!header.contains("header")) {
    throw std::invalid_argument("run log must start with a header line");
  }
  RunLog log(header.at("strategy").get<std::string>(),
             header.at("seed").get<std::uint64_t>(),
             header.at("instances").get<std::vector<std::string>>(),
             header.at("problem"));
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line);
    LogRecord rec;
    rec.iteration = j.at("iteration").get<std::int64_t>();
    rec.evals = j.at("evals").get<std::int64_t>();
    rec.phase = j.at("phase").get<std::string>();
    rec.group = j.value("group", -1);
    for (const auto& c : j.at("candidates")) {
      CandidateRecord cand;
      cand.row_id = c.at("id").get<std::string>();
      for (const auto& [name, value] : c.at("config").items()) {
        cand.config.values[name] = value.get<double>();
      }
      for (const auto& entry : c.at("costs")) {
        cand.costs.emplace_back(entry.at(0).get<std::string>(),
                                outcome_from_json(entry.at(1)));
      }
      rec.candidates.push_back(std::move(cand));
    }
    if (j.contains("assignment")) {
      rec.assignment = j.at("assignment").get<std::vector<int>>();
    }
    if (j.contains("reps")) {
      rec.representatives = j.at("reps").get<std::vector<std::string>>();
    }
    log.append(std::move(rec));
  }
  return log;
}

void RunLog::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write run log to " + path);
  out << to_jsonl();
}

RunLog RunLog::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read run log from " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str());
}

}  // namespace modecfg
