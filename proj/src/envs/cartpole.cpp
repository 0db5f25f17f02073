#include "vecrl/envs/cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace vecrl {

CartPoleEnv::CartPoleEnv(std::size_t num_envs, std::uint64_t seed, long max_episode_steps)
    : VecEnv(num_envs, Space::box({-4.8, -1e9, -0.418, -1e9}, {4.8, 1e9, 0.418, 1e9}),
             Space::discrete(2)),
      max_episode_steps_(max_episode_steps),
      state_(num_envs * 4, 0.0),
      episode_steps_(num_envs, 0) {
  if (max_episode_steps_ < 1) {
    throw std::invalid_argument("cartpole: max_episode_steps must be >= 1");
  }
  rngs_.reserve(num_envs);
  for (std::size_t i = 0; i < num_envs; ++i) rngs_.emplace_back(derive_seed(seed, i));
}

void CartPoleEnv::reset_one(std::size_t i) {
  for (std::size_t k = 0; k < 4; ++k) {
    state_[i * 4 + k] = rngs_[i].uniform(-kInitBound, kInitBound);
  }
  episode_steps_[i] = 0;
}

std::vector<double> CartPoleEnv::reset() {
  for (std::size_t i = 0; i < num_envs_; ++i) reset_one(i);
  return state_;
}

void CartPoleEnv::set_state(std::size_t i, std::span<const double> s) {
  if (s.size() != 4) throw std::invalid_argument("cartpole: state must have 4 entries");
  for (std::size_t k = 0; k < 4; ++k) state_[i * 4 + k] = s[k];
}

StepResult CartPoleEnv::step(std::span<const double> actions) {
  check_actions(actions);
  StepResult out;
  out.observations.resize(num_envs_ * 4);
  out.rewards.assign(num_envs_, 1.0);
  out.dones.assign(num_envs_, 0);
  out.infos.resize(num_envs_);

  for (std::size_t i = 0; i < num_envs_; ++i) {
    double* s = state_.data() + i * 4;
    double force = actions[i] == 1.0 ? kForceMag : -kForceMag;
    double cos_t = std::cos(s[2]);
    double sin_t = std::sin(s[2]);
    double temp = (force + kPoleMassLength * s[3] * s[3] * sin_t) / kTotalMass;
    double theta_acc = (kGravity * sin_t - cos_t * temp) /
                       (kLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
    double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;
    s[0] += kTau * s[1];
    s[1] += kTau * x_acc;
    s[2] += kTau * s[3];
    s[3] += kTau * theta_acc;
    ++episode_steps_[i];

    bool terminated = std::abs(s[0]) > kXThreshold || std::abs(s[2]) > kThetaThreshold;
    bool truncated = episode_steps_[i] >= max_episode_steps_;
    if (terminated || truncated) {
      out.dones[i] = 1;
      out.infos[i]["terminal_observation"] = {s[0], s[1], s[2], s[3]};
      reset_one(i);
    }
    for (std::size_t k = 0; k < 4; ++k) out.observations[i * 4 + k] = s[k];
  }
  return out;
}

}  // namespace vecrl
