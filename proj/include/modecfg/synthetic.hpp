#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "modecfg/evaluation.hpp"
#include "modecfg/param_space.hpp"

namespace modecfg {

/// Classic multimodal test functions, all with global minimum 0 at the origin.
enum class BaseFunction { Ackley, Griewank, Rastrigin, Zakharov };

double ackley(const Eigen::VectorXd& x);
double griewank(const Eigen::VectorXd& x);
double rastrigin(const Eigen::VectorXd& x);
double zakharov(const Eigen::VectorXd& x);
double eval_base(BaseFunction f, const Eigen::VectorXd& x);

/// Haar-uniform rotation matrix (QR of a Gaussian matrix, sign-corrected,
/// determinant forced to +1).
Eigen::MatrixXd random_rotation(int d, std::mt19937_64& rng);

/// Multi-mode benchmark: K modes of N instances each. Instance i of mode m is
/// a rotated, shifted, rescaled test function centered at the mode's shared
/// point z_m, so it is zero there and roughly one at unit distance from it.
class SyntheticProblem {
 public:
  struct Instance {
    BaseFunction base;
    Eigen::MatrixXd rotation;
    Eigen::VectorXd center;  // the mode's z_m
    double scale;            // 1 / mean base value on the unit sphere
    int mode;
  };

  /// Centers are drawn uniformly from [-2, 2]^d; with min_center_separation
  /// > 0 they are re-drawn until all pairwise distances reach it.
  SyntheticProblem(int dimension, int modes, int per_mode, std::uint64_t seed,
                   double min_center_separation = 0.0);

  int dimension() const { return dimension_; }
  int modes() const { return modes_; }
  int per_mode() const { return per_mode_; }
  int num_instances() const { return static_cast<int>(instances_.size()); }
  std::uint64_t seed() const { return seed_; }
  const Instance& instance(int i) const { return instances_.at(i); }
  const std::vector<int>& ground_truth_labels() const { return labels_; }
  const Eigen::VectorXd& mode_center(int m) const { return centers_.at(m); }

  /// Instance ids "i000", "i001", ... in mode-major order.
  std::vector<std::string> instance_ids() const;

  double eval_datum(int index, const Eigen::VectorXd& x) const;

  /// Linear-scaled tuning space over the problem's coordinates, centered at
  /// the origin.
  ParamSpace tuning_space(double sigma0 = 1.0) const;

 private:
  int dimension_, modes_, per_mode_;
  std::uint64_t seed_;
  std::vector<Eigen::VectorXd> centers_;
  std::vector<Instance> instances_;
  std::vector<int> labels_;
};

/// Evaluator over a SyntheticProblem; configurations are coordinate maps
/// "x0".."x<d-1>" produced by tuning_space().
class SyntheticEvaluator : public Evaluator {
 public:
  explicit SyntheticEvaluator(const SyntheticProblem& problem);
  std::vector<std::vector<EvalOutcome>> evaluate(
      const std::vector<EvalTask>& tasks) override;

 private:
  const SyntheticProblem& problem_;
};

}  // namespace modecfg
