#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace modecfg {

/// A point in the transformed, unconstrained space the optimizer samples in.
using SearchPoint = Eigen::VectorXd;

enum class ParamScale { Log, Linear };

/// One tunable parameter: its name, initial value in user units, transform
/// choice and optional box bounds. Log-scaled parameters must stay strictly
/// positive in user units.
struct ParamSpec {
  std::string name;
  double init = 1.0;
  ParamScale scale = ParamScale::Log;
  std::optional<double> lower;
  std::optional<double> upper;
};

/// A named assignment of user-unit values, keyed by parameter name.
struct Configuration {
  std::map<std::string, double> values;

  /// Canonical full-precision serialization, usable as a cache key.
  std::string fingerprint() const;

  bool operator==(const Configuration&) const = default;
};

class SpaceParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An ordered list of parameter specs plus the initial step size sigma0 used
/// by the optimizer in transformed space. Immutable after construction.
class ParamSpace {
 public:
  ParamSpace(std::vector<ParamSpec> params, double sigma0 = 0.5);

  int dimension() const { return static_cast<int>(params_.size()); }
  double sigma0() const { return sigma0_; }
  const std::vector<ParamSpec>& params() const { return params_; }
  const ParamSpec& param(int i) const { return params_.at(i); }

  /// Configuration built from every parameter's init value.
  Configuration initial_configuration() const;

  /// Throws std::invalid_argument unless cfg has exactly this space's names
  /// and every log-scaled entry is strictly positive.
  void validate(const Configuration& cfg) const;

 private:
  std::vector<ParamSpec> params_;
  double sigma0_;
};

/// Maps user units into the unconstrained search space: ln(x) for log-scaled
/// parameters, identity for linear ones. Throws std::domain_error on a
/// non-positive value under log scale.
SearchPoint to_search_space(const ParamSpace& space, const Configuration& cfg);

/// Inverse of to_search_space. Total: exp() overflow/underflow is saturated
/// so log-scaled values stay finite and strictly positive, and values are
/// clamped into [lower, upper] where bounds are present. The optimizer itself
/// never sees the bounds.
Configuration from_search_space(const ParamSpace& space, const SearchPoint& pt);

/// Parses the JSON space file documented in the README:
///   {"sigma": 0.5, "params": [{"name": "reg", "init": 10,
///                              "scale": "log", "min": 1, "max": 100}]}
/// scale defaults to "log", sigma to 0.5; min/max are optional. Unknown keys
/// are rejected. Throws SpaceParseError naming the offending field.
ParamSpace parse_space_file(const std::string& text);

}  // namespace modecfg
