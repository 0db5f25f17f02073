#include "vecrl/envs/pendulum.hpp"

#include <cmath>
#include <stdexcept>

namespace vecrl {

namespace {

double wrap_angle(double theta) {
  double t = std::fmod(theta + PendulumEnv::kPi, 2.0 * PendulumEnv::kPi);
  if (t < 0.0) t += 2.0 * PendulumEnv::kPi;
  return t - PendulumEnv::kPi;
}

}  // namespace

PendulumEnv::PendulumEnv(std::size_t num_envs, std::uint64_t seed, long max_episode_steps)
    : VecEnv(num_envs, Space::box({-1.0, -1.0, -kMaxSpeed}, {1.0, 1.0, kMaxSpeed}),
             Space::box({-kMaxTorque}, {kMaxTorque})),
      max_episode_steps_(max_episode_steps),
      state_(num_envs * 2, 0.0),
      episode_steps_(num_envs, 0) {
  if (max_episode_steps_ < 1) {
    throw std::invalid_argument("pendulum: max_episode_steps must be >= 1");
  }
  rngs_.reserve(num_envs);
  for (std::size_t i = 0; i < num_envs; ++i) rngs_.emplace_back(derive_seed(seed, i));
}

void PendulumEnv::reset_one(std::size_t i) {
  state_[i * 2] = rngs_[i].uniform(-kPi, kPi);
  state_[i * 2 + 1] = rngs_[i].uniform(-1.0, 1.0);
  episode_steps_[i] = 0;
}

void PendulumEnv::observe_one(std::size_t i, double* out) const {
  out[0] = std::cos(state_[i * 2]);
  out[1] = std::sin(state_[i * 2]);
  out[2] = state_[i * 2 + 1];
}

std::vector<double> PendulumEnv::reset() {
  std::vector<double> obs(num_envs_ * 3);
  for (std::size_t i = 0; i < num_envs_; ++i) {
    reset_one(i);
    observe_one(i, obs.data() + i * 3);
  }
  return obs;
}

void PendulumEnv::set_state(std::size_t i, std::span<const double> s) {
  if (s.size() != 2) throw std::invalid_argument("pendulum: state is [theta, theta_dot]");
  state_[i * 2] = s[0];
  state_[i * 2 + 1] = s[1];
}

StepResult PendulumEnv::step(std::span<const double> actions) {
  check_actions(actions);
  StepResult out;
  out.observations.resize(num_envs_ * 3);
  out.rewards.assign(num_envs_, 0.0);
  out.dones.assign(num_envs_, 0);
  out.infos.resize(num_envs_);

  for (std::size_t i = 0; i < num_envs_; ++i) {
    double theta = state_[i * 2];
    double theta_dot = state_[i * 2 + 1];
    double u = std::min(std::max(actions[i], -kMaxTorque), kMaxTorque);

    double tn = wrap_angle(theta);
    out.rewards[i] = -(tn * tn + 0.1 * theta_dot * theta_dot + 0.001 * u * u);

    double new_dot = theta_dot + (3.0 * kGravity / (2.0 * kLength) * std::sin(theta) +
                                  3.0 / (kMass * kLength * kLength) * u) *
                                     kDt;
    new_dot = std::min(std::max(new_dot, -kMaxSpeed), kMaxSpeed);
    state_[i * 2] = theta + new_dot * kDt;
    state_[i * 2 + 1] = new_dot;
    ++episode_steps_[i];

    if (episode_steps_[i] >= max_episode_steps_) {
      out.dones[i] = 1;
      double term[3];
      observe_one(i, term);
      out.infos[i]["terminal_observation"] = {term[0], term[1], term[2]};
      reset_one(i);
    }
    observe_one(i, out.observations.data() + i * 3);
  }
  return out;
}

}  // namespace vecrl
