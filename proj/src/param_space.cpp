#include "modecfg/param_space.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace modecfg {

namespace {

void check_spec(const ParamSpec& p) {
  if (p.name.empty()) {
    throw std::invalid_argument("parameter with empty name");
  }
  if (p.scale == ParamScale::Log && !(p.init > 0.0)) {
    throw std::domain_error("parameter '" + p.name +
                            "': init must be > 0 under log scale");
  }
  if (p.lower && p.upper && !(*p.lower < *p.upper)) {
    throw std::invalid_argument("parameter '" + p.name + "': min must be < max");
  }
  if (p.scale == ParamScale::Log) {
    if ((p.lower && !(*p.lower > 0.0)) || (p.upper && !(*p.upper > 0.0))) {
      throw std::invalid_argument("parameter '" + p.name +
                                  "': log-scale bounds must be > 0");
    }
  }
  if ((p.lower && p.init < *p.lower) || (p.upper && p.init > *p.upper)) {
    throw std::invalid_argument("parameter '" + p.name +
                                "': init outside [min, max]");
  }
  if (!std::isfinite(p.init)) {
    throw std::invalid_argument("parameter '" + p.name + "': init not finite");
  }
}

}  // namespace

std::string Configuration::fingerprint() const {
  // std::map keeps keys sorted; nlohmann emits shortest exact doubles, so the
  // string round-trips bit-exactly.
  nlohmann::json j(values);
  return j.dump();
}

ParamSpace::ParamSpace(std::vector<ParamSpec> params, double sigma0)
    : params_(std::move(params)), sigma0_(sigma0) {
  if (params_.empty()) {
    throw std::invalid_argument("parameter space needs at least one parameter");
  }
  if (!(sigma0_ > 0.0) || !std::isfinite(sigma0_)) {
    throw std::invalid_argument("sigma must be a positive real");
  }
  std::set<std::string> seen;
  for (const auto& p : params_) {
    check_spec(p);
    if (!seen.insert(p.name).second) {
      throw std::invalid_argument("duplicate parameter name '" + p.name + "'");
    }
  }
}

Configuration ParamSpace::initial_configuration() const {
  Configuration cfg;
  for (const auto& p : params_) cfg.values[p.name] = p.init;
  return cfg;
}

void ParamSpace::validate(const Configuration& cfg) const {
  if (static_cast<int>(cfg.values.size()) != dimension()) {
    throw std::invalid_argument("configuration has wrong number of values");
  }
  for (const auto& p : params_) {
    auto it = cfg.values.find(p.name);
    if (it == cfg.values.end()) {
      throw std::invalid_argument("configuration missing parameter '" + p.name +
                                  "'");
    }
    if (p.scale == ParamScale::Log && !(it->second > 0.0)) {
      throw std::domain_error("configuration value for '" + p.name +
                              "' must be > 0 under log scale");
    }
  }
}

SearchPoint to_search_space(const ParamSpace& space, const Configuration& cfg) {
  space.validate(cfg);
  SearchPoint pt(space.dimension());
  for (int i = 0; i < space.dimension(); ++i) {
    const auto& p = space.param(i);
    const double v = cfg.values.at(p.name);
    pt[i] = p.scale == ParamScale::Log ? std::log(v) : v;
  }
  return pt;
}

Configuration from_search_space(const ParamSpace& space, const SearchPoint& pt) {
  if (pt.size() != space.dimension()) {
    throw std::invalid_argument("search point has wrong dimension");
  }
  Configuration cfg;
  for (int i = 0; i < space.dimension(); ++i) {
    const auto& p = space.param(i);
    double v = pt[i];
    if (p.scale == ParamScale::Log) {
      v = std::exp(v);
      // Saturate so extreme coordinates still decode to finite, strictly
      // positive user values.
      v = std::min(v, std::numeric_limits<double>::max());
      v = std::max(v, std::numeric_limits<double>::min());
    }
    if (p.lower) v = std::max(v, *p.lower);
    if (p.upper) v = std::min(v, *p.upper);
    cfg.values[p.name] = v;
  }
  return cfg;
}

namespace {

double require_number(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number()) {
    throw SpaceParseError("field '" + field + "' must be a number");
  }
  return j.get<double>();
}

ParamSpec parse_param(const nlohmann::json& j, int index) {
  const std::string where = "params[" + std::to_string(index) + "]";
  if (!j.is_object()) throw SpaceParseError(where + " must be an object");
  ParamSpec spec;
  bool saw_name = false, saw_init = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "name") {
      if (!value.is_string() || value.get<std::string>().empty()) {
        throw SpaceParseError(where + ".name must be a non-empty string");
      }
      spec.name = value.get<std::string>();
      saw_name = true;
    } else if (key == "init") {
      spec.init = require_number(value, where + ".init");
      saw_init = true;
    } else if (key == "scale") {
      const std::string s = value.is_string() ? value.get<std::string>() : "";
      if (s == "log") {
        spec.scale = ParamScale::Log;
      } else if (s == "linear") {
        spec.scale = ParamScale::Linear;
      } else {
        throw SpaceParseError(where + ".scale must be \"log\" or \"linear\"");
      }
    } else if (key == "min") {
      spec.lower = require_number(value, where + ".min");
    } else if (key == "max") {
      spec.upper = require_number(value, where + ".max");
    } else {
      throw SpaceParseError("unknown key '" + key + "' in " + where);
    }
  }
  if (!saw_name) throw SpaceParseError(where + " is missing 'name'");
  if (!saw_init) throw SpaceParseError(where + " is missing 'init'");
  return spec;
}

}  // namespace

ParamSpace parse_space_file(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpaceParseError(std::string("malformed space file: ") + e.what());
  }
  if (!doc.is_object()) throw SpaceParseError("space file must be an object");

  double sigma0 = 0.5;
  std::vector<ParamSpec> specs;
  bool saw_params = false;
  for (const auto& [key, value] : doc.items()) {
    if (key == "sigma") {
      sigma0 = require_number(value, "sigma");
    } else if (key == "params") {
      if (!value.is_array() || value.empty()) {
        throw SpaceParseError("'params' must be a non-empty array");
      }
      for (int i = 0; i < static_cast<int>(value.size()); ++i) {
        specs.push_back(parse_param(value[i], i));
      }
      saw_params = true;
    } else {
      throw SpaceParseError("unknown key '" + key + "' in space file");
    }
  }
  if (!saw_params) throw SpaceParseError("space file is missing 'params'");

  try {
    return ParamSpace(std::move(specs), sigma0);
  } catch (const std::exception& e) {
    throw SpaceParseError(e.what());
  }
}

}  // namespace modecfg
