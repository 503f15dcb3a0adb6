#pragma once

#include <random>
#include <vector>

namespace modecfg {

/// One Gaussian Thompson-sampling bandit per instance, K arms each (one per
/// optimizer). Costs are minimized: a pull samples theta_a ~ N(mean_a,
/// s^2 / max(n_a, 1)) for every arm and returns the argmin. Each instance has
/// its own observation scale s.
class BanditState {
 public:
  BanditState(int num_instances, int num_arms);

  int num_instances() const { return static_cast<int>(instances_.size()); }
  int num_arms() const { return num_arms_; }

  /// Sets every arm of the instance to the same state: the given mean as one
  /// pseudo-observation, and the observation scale (floored at 1e-6).
  void init_instance(int instance, double mean, double scale);

  /// Thompson sample; lower sampled cost wins, ties go to the lower arm id.
  int pull(int instance, std::mt19937_64& rng) const;

  /// Running-mean update of one arm; other arms are untouched.
  void update(int instance, int arm, double cost);

  /// Arm with the lowest running mean (ties to the lower id).
  int best_arm(int instance) const;

  int pull_count(int instance, int arm) const;
  double arm_mean(int instance, int arm) const;
  double scale(int instance) const;

 private:
  struct Arm {
    int pulls = 0;
    double mean = 0.0;
  };
  struct InstanceArms {
    std::vector<Arm> arms;
    double scale = 1.0;
  };
  std::vector<InstanceArms> instances_;
  int num_arms_;
};

}  // namespace modecfg
