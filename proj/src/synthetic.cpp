#include "modecfg/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace modecfg {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSphereSamples = 128;
}  // namespace

double ackley(const Eigen::VectorXd& x) {
  const double d = static_cast<double>(x.size());
  const double rms = std::sqrt(x.squaredNorm() / d);
  const double cos_mean = (kTwoPi * x.array()).cos().sum() / d;
  return -20.0 * std::exp(-0.2 * rms) - std::exp(cos_mean) + 20.0 +
         std::numbers::e;
}

double griewank(const Eigen::VectorXd& x) {
  double prod = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return 1.0 + x.squaredNorm() / 4000.0 - prod;
}

double rastrigin(const Eigen::VectorXd& x) {
  double sum = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x[i] * x[i] - 10.0 * std::cos(kTwoPi * x[i]);
  }
  return sum;
}

double zakharov(const Eigen::VectorXd& x) {
  double weighted = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    weighted += 0.5 * static_cast<double>(i + 1) * x[i];
  }
  const double w2 = weighted * weighted;
  return x.squaredNorm() + w2 + w2 * w2;
}

double eval_base(BaseFunction f, const Eigen::VectorXd& x) {
  switch (f) {
    case BaseFunction::Ackley: return ackley(x);
    case BaseFunction::Griewank: return griewank(x);
    case BaseFunction::Rastrigin: return rastrigin(x);
    case BaseFunction::Zakharov: return zakharov(x);
  }
  throw std::logic_error("unknown base function");
}

Eigen::MatrixXd random_rotation(int d, std::mt19937_64& rng) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign correction makes the distribution Haar; flipping one column then
  // pins the determinant to +1.
  for (int i = 0; i < d; ++i) {
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  if (q.determinant() < 0.0) q.col(d - 1) = -q.col(d - 1);
  return q;
}

SyntheticProblem::SyntheticProblem(int dimension, int modes, int per_mode,
                                   std::uint64_t seed,
                                   double min_center_separation)
    : dimension_(dimension), modes_(modes), per_mode_(per_mode), seed_(seed) {
  if (dimension < 2) throw std::invalid_argument("dimension must be >= 2");
  if (modes < 1 || per_mode < 1) {
    throw std::invalid_argument("modes and per_mode must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0);

  for (int attempt = 0;; ++attempt) {
    centers_.clear();
    for (int m = 0; m < modes; ++m) {
      Eigen::VectorXd z(dimension);
      for (int i = 0; i < dimension; ++i) z[i] = box(rng);
      centers_.push_back(std::move(z));
    }
    bool separated = true;
    for (int a = 0; a < modes && separated; ++a) {
      for (int b = a + 1; b < modes; ++b) {
        if ((centers_[a] - centers_[b]).norm() < min_center_separation) {
          separated = false;
          break;
        }
      }
    }
    if (separated) break;
    if (attempt > 100000) {
      throw std::runtime_error("cannot separate mode centers that far in [-2,2]^d");
    }
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  const BaseFunction kinds[4] = {BaseFunction::Ackley, BaseFunction::Griewank,
                                 BaseFunction::Rastrigin,
                                 BaseFunction::Zakharov};
  for (int m = 0; m < modes; ++m) {
    for (int i = 0; i < per_mode; ++i) {
      const int global = m * per_mode + i;
      Instance inst;
      inst.base = kinds[global % 4];
      inst.rotation = random_rotation(dimension, rng);
      inst.center = centers_[m];
      inst.mode = m;
      // Calibrate so the mean value on the unit sphere around the minimum
      // is about one.
      double mean = 0.0;
      for (int s = 0; s < kSphereSamples; ++s) {
        Eigen::VectorXd u(dimension);
        for (int j = 0; j < dimension; ++j) u[j] = gauss(rng);
        u /= u.norm();
        mean += eval_base(inst.base, inst.rotation * u);
      }
      mean /= kSphereSamples;
      inst.scale = 1.0 / mean;
      instances_.push_back(std::move(inst));
      labels_.push_back(m);
    }
  }
}

std::vector<std::string> SyntheticProblem::instance_ids() const {
  std::vector<std::string> ids;
  ids.reserve(instances_.size());
  for (int i = 0; i < num_instances(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "i%03d", i);
    ids.emplace_back(buf);
  }
  return ids;
}

double SyntheticProblem::eval_datum(int index, const Eigen::VectorXd& x) const {
  if (index < 0 || index >= num_instances()) {
    throw std::invalid_argument("instance index out of range");
  }
  if (x.size() != dimension_) {
    throw std::invalid_argument("point has wrong dimension");
  }
  const Instance& inst = instances_[index];
  return inst.scale * eval_base(inst.base, inst.rotation * (x - inst.center));
}

ParamSpace SyntheticProblem::tuning_space(double sigma0) const {
  std::vector<ParamSpec> specs;
  for (int i = 0; i < dimension_; ++i) {
    ParamSpec p;
    p.name = "x" + std::to_string(i);
    p.init = 0.0;
    p.scale = ParamScale::Linear;
    specs.push_back(std::move(p));
  }
  return ParamSpace(std::move(specs), sigma0);
}

SyntheticEvaluator::SyntheticEvaluator(const SyntheticProblem& problem)
    : problem_(problem) {}

std::vector<std::vector<EvalOutcome>> SyntheticEvaluator::evaluate(
    const std::vector<EvalTask>& tasks) {
  std::vector<std::vector<EvalOutcome>> results;
  results.reserve(tasks.size());
  for (const auto& task : tasks) {
    Eigen::VectorXd x(problem_.dimension());
    for (int i = 0; i < problem_.dimension(); ++i) {
      x[i] = task.config.values.at("x" + std::to_string(i));
    }
    std::vector<EvalOutcome> row;
    row.reserve(task.instances.size());
    for (const auto& id : task.instances) {
      const int idx = std::stoi(id.substr(1));
      row.push_back(EvalOutcome::ok(problem_.eval_datum(idx, x)));
    }
    results.push_back(std::move(row));
  }
  return results;
}

}  // namespace modecfg
