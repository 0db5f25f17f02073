#pragma once

#include "vecrl/env.hpp"
#include "vecrl/rng.hpp"

namespace vecrl {

// Torque-controlled inverted pendulum swing-up, continuing task truncated at
// a fixed step limit. State per sub-env: [theta, theta_dot]; observation
// [cos(theta), sin(theta), theta_dot]. Reward = -(theta_n^2 + 0.1*theta_dot^2
// + 0.001*u^2) with theta_n wrapped to [-pi, pi] and u the clipped torque.
class PendulumEnv final : public VecEnv {
 public:
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kDt = 0.05;
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kPi = 3.14159265358979323846;

  PendulumEnv(std::size_t num_envs, std::uint64_t seed, long max_episode_steps = 200);

  std::vector<double> reset() override;
  StepResult step(std::span<const double> actions) override;

  std::span<const double> state(std::size_t i) const { return {state_.data() + i * 2, 2}; }
  void set_state(std::size_t i, std::span<const double> s);

 private:
  void reset_one(std::size_t i);
  void observe_one(std::size_t i, double* out) const;

  long max_episode_steps_;
  std::vector<double> state_;  // [num_envs * 2]
  std::vector<long> episode_steps_;
  std::vector<Rng> rngs_;
};

}  // namespace vecrl
