#pragma once

#include "vecrl/env.hpp"
#include "vecrl/rng.hpp"

namespace vecrl {

// Classic cart-pole balancing task, Euler-integrated with the standard
// published constants. State per sub-env: [x, x_dot, theta, theta_dot].
// Actions: Discrete(2), 0 = push left, 1 = push right. Reward 1 per step.
// Episode ends when |x| > 2.4, |theta| > 12 deg, or the step limit hits.
class CartPoleEnv final : public VecEnv {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kTotalMass = kMassCart + kMassPole;
  static constexpr double kLength = 0.5;  // half pole length
  static constexpr double kPoleMassLength = kMassPole * kLength;
  static constexpr double kForceMag = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kThetaThreshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr double kXThreshold = 2.4;
  static constexpr double kInitBound = 0.05;

  CartPoleEnv(std::size_t num_envs, std::uint64_t seed, long max_episode_steps = 500);

  std::vector<double> reset() override;
  StepResult step(std::span<const double> actions) override;

  // Test seams: direct access to one sub-env's state.
  std::span<const double> state(std::size_t i) const { return {state_.data() + i * 4, 4}; }
  void set_state(std::size_t i, std::span<const double> s);
  long episode_step(std::size_t i) const { return episode_steps_[i]; }

 private:
  void reset_one(std::size_t i);

  long max_episode_steps_;
  std::vector<double> state_;  // [num_envs * 4]
  std::vector<long> episode_steps_;
  std::vector<Rng> rngs_;
};

}  // namespace vecrl
