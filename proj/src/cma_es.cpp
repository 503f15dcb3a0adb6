#include "modecfg/cma_es.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace modecfg {

namespace {
constexpr double kEigenvalueFloorFactor = 1e-14;
}

CmaEs::CmaEs(const SearchPoint& x0, double sigma0, int lambda,
             std::uint64_t seed)
    : d_(static_cast<int>(x0.size())), seed_(seed), rng_(seed) {
  if (d_ < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be > 0");

  lambda_ = lambda > 0
                ? lambda
                : 4 + static_cast<int>(std::floor(3.0 * std::log(double(d_))));
  if (lambda_ < 2) throw std::invalid_argument("population size must be >= 2");
  mu_ = lambda_ / 2;

  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i) {
    weights_[i] = std::log((lambda_ + 1) / 2.0) - std::log(i + 1.0);
  }
  const double wsum = weights_.sum();
  mu_eff_ = wsum * wsum / weights_.squaredNorm();
  weights_ /= wsum;

  c_sigma_ = (mu_eff_ + 2.0) / (d_ + mu_eff_ + 5.0);
  d_sigma_ = 1.0 +
             2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (d_ + 1.0)) - 1.0) +
             c_sigma_;
  c_cov_path_ = (4.0 + mu_eff_ / d_) / (d_ + 4.0 + 2.0 * mu_eff_ / d_);
  c_rank1_ = 2.0 / ((d_ + 1.3) * (d_ + 1.3) + mu_eff_);
  c_rank_mu_ = std::min(1.0 - c_rank1_,
                        2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                            ((d_ + 2.0) * (d_ + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(double(d_)) *
           (1.0 - 1.0 / (4.0 * d_) + 1.0 / (21.0 * d_ * d_));

  mean_ = x0;
  sigma_ = sigma0;
  cov_ = Eigen::MatrixXd::Identity(d_, d_);
  eigen_basis_ = Eigen::MatrixXd::Identity(d_, d_);
  eigen_scale_ = Eigen::VectorXd::Ones(d_);
  path_sigma_ = Eigen::VectorXd::Zero(d_);
  path_cov_ = Eigen::VectorXd::Zero(d_);
}

CandidateBatch CmaEs::ask() {
  CandidateBatch batch;
  batch.generation = generation_;
  batch.points.reserve(lambda_);
  // Fresh distribution object per call: sampling consumes a deterministic
  // engine sequence regardless of earlier asks.
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < lambda_; ++i) {
    Eigen::VectorXd z(d_);
    for (int j = 0; j < d_; ++j) z[j] = gauss(rng_);
    batch.points.push_back(mean_ +
                           sigma_ * (eigen_basis_ *
                                     (eigen_scale_.array() * z.array()).matrix()));
  }
  return batch;
}

void CmaEs::tell(const CandidateBatch& batch, const std::vector<double>& costs) {
  if (static_cast<int>(batch.points.size()) != lambda_ ||
      static_cast<int>(costs.size()) != lambda_) {
    throw std::invalid_argument("batch and costs must have length lambda");
  }

  // Rank candidates: finite costs ascending, NaN strictly worst, ties keep
  // sampling order.
  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const bool na = std::isnan(costs[a]), nb = std::isnan(costs[b]);
    if (na != nb) return nb;
    if (na && nb) return false;
    return costs[a] < costs[b];
  });

  const int lead = order.front();
  if (!std::isnan(costs[lead]) && (!best_ || costs[lead] < best_->cost)) {
    best_ = Best{batch.points[lead], costs[lead]};
  }

  ++generation_;

  // A generation with no cost differences (all equal, or nothing finite)
  // carries no ranking information; the distribution is left unchanged.
  const double first = costs[order.front()];
  const bool flat = std::all_of(costs.begin(), costs.end(), [&](double c) {
    return (std::isnan(c) && std::isnan(first)) || c == first;
  });
  if (flat) return;

  const Eigen::VectorXd old_mean = mean_;
  Eigen::VectorXd y_weighted = Eigen::VectorXd::Zero(d_);
  for (int i = 0; i < mu_; ++i) {
    y_weighted += weights_[i] * (batch.points[order[i]] - old_mean);
  }
  y_weighted /= sigma_;
  mean_ = old_mean + sigma_ * y_weighted;

  // C^{-1/2} (m' - m) / sigma via the cached eigensystem.
  const Eigen::VectorXd whitened =
      eigen_basis_ *
      (eigen_basis_.transpose() * y_weighted).cwiseQuotient(eigen_scale_);
  path_sigma_ = (1.0 - c_sigma_) * path_sigma_ +
                std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * whitened;

  const double ps_norm = path_sigma_.norm();
  const double expected = std::sqrt(
      1.0 - std::pow(1.0 - c_sigma_, 2.0 * static_cast<double>(generation_)));
  const bool h_sigma =
      ps_norm / expected < (1.4 + 2.0 / (d_ + 1.0)) * chi_n_;

  path_cov_ = (1.0 - c_cov_path_) * path_cov_;
  if (h_sigma) {
    path_cov_ += std::sqrt(c_cov_path_ * (2.0 - c_cov_path_) * mu_eff_) *
                 y_weighted;
  }

  const double rank1_correction =
      h_sigma ? 0.0 : c_rank1_ * c_cov_path_ * (2.0 - c_cov_path_);
  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(d_, d_);
  for (int i = 0; i < mu_; ++i) {
    const Eigen::VectorXd y = (batch.points[order[i]] - old_mean) / sigma_;
    rank_mu.noalias() += weights_[i] * y * y.transpose();
  }
  cov_ = (1.0 - c_rank1_ - c_rank_mu_ + rank1_correction) * cov_ +
         c_rank1_ * path_cov_ * path_cov_.transpose() + c_rank_mu_ * rank_mu;

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));

  refresh_eigensystem();
}

void CmaEs::refresh_eigensystem() {
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_);
  Eigen::VectorXd evals = solver.eigenvalues();
  const double floor_value =
      kEigenvalueFloorFactor * std::max(cov_.trace() / d_, 0.0) +
      std::numeric_limits<double>::min();
  evals = evals.cwiseMax(floor_value);
  eigen_basis_ = solver.eigenvectors();
  eigen_scale_ = evals.cwiseSqrt();
  cov_ = eigen_basis_ * evals.asDiagonal() * eigen_basis_.transpose();
}

SearchPoint CmaEs::recommend() const {
  if (!best_) throw std::logic_error("recommend() before any finite tell");
  return best_->point;
}

double CmaEs::best_cost() const {
  if (!best_) throw std::logic_error("best_cost() before any finite tell");
  return best_->cost;
}

bool CmaEs::same_search_state(const CmaEs& other) const {
  return d_ == other.d_ && lambda_ == other.lambda_ &&
         generation_ == other.generation_ && sigma_ == other.sigma_ &&
         mean_ == other.mean_ && cov_ == other.cov_ &&
         path_sigma_ == other.path_sigma_ && path_cov_ == other.path_cov_ &&
         rng_ == other.rng_;
}

}  // namespace modecfg
