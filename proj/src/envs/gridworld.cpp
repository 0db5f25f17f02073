#include "vecrl/envs/gridworld.hpp"

#include <stdexcept>

namespace vecrl {

GridWorldEnv::GridWorldEnv(std::size_t num_envs, std::uint64_t seed, std::size_t size,
                           long max_episode_steps)
    : VecEnv(num_envs, Space::discrete(size * size), Space::discrete(4)),
      size_(size),
      max_episode_steps_(max_episode_steps),
      state_(num_envs, 0),
      episode_steps_(num_envs, 0) {
  (void)seed;  // dynamics and start state are deterministic
  if (size_ < 2) throw std::invalid_argument("gridworld: size must be >= 2");
  if (max_episode_steps_ < 1) {
    throw std::invalid_argument("gridworld: max_episode_steps must be >= 1");
  }
}

std::size_t GridWorldEnv::next_state(std::size_t state, std::size_t action) const {
  std::size_t row = state / size_;
  std::size_t col = state % size_;
  switch (action) {
    case 0: if (row > 0) --row; break;          // up
    case 1: if (row + 1 < size_) ++row; break;  // down
    case 2: if (col > 0) --col; break;          // left
    case 3: if (col + 1 < size_) ++col; break;  // right
    default: throw std::out_of_range("gridworld: action out of range");
  }
  return row * size_ + col;
}

std::vector<double> GridWorldEnv::reset() {
  std::vector<double> obs(num_envs_, 0.0);
  for (std::size_t i = 0; i < num_envs_; ++i) {
    state_[i] = 0;
    episode_steps_[i] = 0;
  }
  return obs;
}

StepResult GridWorldEnv::step(std::span<const double> actions) {
  check_actions(actions);
  StepResult out;
  out.observations.resize(num_envs_);
  out.rewards.assign(num_envs_, 0.0);
  out.dones.assign(num_envs_, 0);
  out.infos.resize(num_envs_);

  for (std::size_t i = 0; i < num_envs_; ++i) {
    std::size_t next = next_state(state_[i], static_cast<std::size_t>(actions[i]));
    ++episode_steps_[i];
    bool reached = next == goal_state();
    out.rewards[i] = reached ? kGoalReward : kStepReward;
    if (reached || episode_steps_[i] >= max_episode_steps_) {
      out.dones[i] = 1;
      out.infos[i]["terminal_observation"] = {static_cast<double>(next)};
      state_[i] = 0;
      episode_steps_[i] = 0;
    } else {
      state_[i] = next;
    }
    out.observations[i] = static_cast<double>(state_[i]);
  }
  return out;
}

}  // namespace vecrl
