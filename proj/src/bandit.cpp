#include "modecfg/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace modecfg {

namespace {
constexpr double kScaleFloor = 1e-6;
}

BanditState::BanditState(int num_instances, int num_arms)
    : num_arms_(num_arms) {
  if (num_instances < 1 || num_arms < 1) {
    throw std::invalid_argument("bandit needs >= 1 instance and >= 1 arm");
  }
  instances_.resize(num_instances);
  for (auto& inst : instances_) inst.arms.resize(num_arms);
}

void BanditState::init_instance(int instance, double mean, double scale) {
  auto& inst = instances_.at(instance);
  inst.scale = std::max(scale, kScaleFloor);
  for (auto& arm : inst.arms) arm = Arm{1, mean};
}

int BanditState::pull(int instance, std::mt19937_64& rng) const {
  const auto& inst = instances_.at(instance);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int best = 0;
  double best_sample = 0.0;
  for (int a = 0; a < num_arms_; ++a) {
    const auto& arm = inst.arms[a];
    const double std_dev =
        inst.scale / std::sqrt(static_cast<double>(std::max(arm.pulls, 1)));
    const double sample = arm.mean + std_dev * gauss(rng);
    if (a == 0 || sample < best_sample) {
      best_sample = sample;
      best = a;
    }
  }
  return best;
}

void BanditState::update(int instance, int arm, double cost) {
  auto& a = instances_.at(instance).arms.at(arm);
  a.mean = (a.mean * a.pulls + cost) / (a.pulls + 1);
  ++a.pulls;
}

int BanditState::best_arm(int instance) const {
  const auto& inst = instances_.at(instance);
  int best = 0;
  for (int a = 1; a < num_arms_; ++a) {
    if (inst.arms[a].mean < inst.arms[best].mean) best = a;
  }
  return best;
}

int BanditState::pull_count(int instance, int arm) const {
  return instances_.at(instance).arms.at(arm).pulls;
}

double BanditState::arm_mean(int instance, int arm) const {
  return instances_.at(instance).arms.at(arm).mean;
}

double BanditState::scale(int instance) const {
  return instances_.at(instance).scale;
}

}  // namespace modecfg
