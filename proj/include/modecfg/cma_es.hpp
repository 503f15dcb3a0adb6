#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "modecfg/param_space.hpp"

namespace modecfg {

/// One generation of candidate points, in sampling order.
struct CandidateBatch {
  std::vector<SearchPoint> points;
  std::int64_t generation = 0;
};

/// Covariance Matrix Adaptation Evolution Strategy, (mu/mu_w, lambda), with
/// an ask/tell interface. Rank-based: only the ordering of told costs matters,
/// so any strictly increasing transform of a generation's costs leaves the
/// post-tell distribution state bit-identical.
///
/// The object has value semantics; a copy is an independent optimizer that
/// replays identically. NaN costs are ranked strictly worst instead of
/// raising, so failed evaluations cannot abort a run. A generation whose
/// finite costs are all equal carries no ranking information and leaves the
/// distribution unchanged.
class CmaEs {
 public:
  /// lambda <= 0 selects the default population size 4 + floor(3 ln d).
  /// Throws std::invalid_argument for d < 1 or an explicit lambda < 2.
  CmaEs(const SearchPoint& x0, double sigma0, int lambda, std::uint64_t seed);

  CmaEs(const SearchPoint& x0, double sigma0, std::uint64_t seed)
      : CmaEs(x0, sigma0, 0, seed) {}

  /// Samples lambda points from the current multivariate Gaussian. Advances
  /// the internal RNG: consecutive asks differ, clones ask identically.
  CandidateBatch ask();

  /// Standard update: weighted recombination of the mu = floor(lambda/2) best,
  /// cumulative step-size adaptation, rank-one and rank-mu covariance updates.
  /// costs.size() must equal lambda.
  void tell(const CandidateBatch& batch, const std::vector<double>& costs);

  /// Best point ever told, by cost, earliest wins ties. Throws
  /// std::logic_error before the first tell with a finite cost.
  SearchPoint recommend() const;
  double best_cost() const;
  bool has_recommendation() const { return best_.has_value(); }

  int dimension() const { return d_; }
  int lambda() const { return lambda_; }
  std::int64_t generation() const { return generation_; }
  double step_size() const { return sigma_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::VectorXd& path_sigma() const { return path_sigma_; }
  const Eigen::VectorXd& path_cov() const { return path_cov_; }
  std::uint64_t seed() const { return seed_; }

  /// Distribution-state equality (mean, sigma, covariance, paths, generation,
  /// RNG); ignores the best-so-far cost bookkeeping.
  bool same_search_state(const CmaEs& other) const;

 private:
  void refresh_eigensystem();

  int d_;
  int lambda_;
  int mu_;
  Eigen::VectorXd weights_;
  double mu_eff_;
  double c_sigma_, d_sigma_, c_cov_path_, c_rank1_, c_rank_mu_;
  double chi_n_;

  Eigen::VectorXd mean_;
  double sigma_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd eigen_basis_;   // B
  Eigen::VectorXd eigen_scale_;   // D = sqrt(eigenvalues)
  Eigen::VectorXd path_sigma_;
  Eigen::VectorXd path_cov_;
  std::int64_t generation_ = 0;

  std::uint64_t seed_;
  std::mt19937_64 rng_;

  struct Best {
    SearchPoint point;
    double cost;
  };
  std::optional<Best> best_;
};

}  // namespace modecfg
