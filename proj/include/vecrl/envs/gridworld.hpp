#pragma once

#include "vecrl/env.hpp"
#include "vecrl/rng.hpp"

namespace vecrl {

// Deterministic square grid. Start top-left (cell 0), goal bottom-right.
// Actions: Discrete(4) = up, down, left, right; moving off-grid stays put.
// Reward +10 for entering the goal, -1 otherwise; episodes cap at 100 steps.
// Observation: the cell index, obs space Discrete(size*size).
class GridWorldEnv final : public VecEnv {
 public:
  static constexpr double kStepReward = -1.0;
  static constexpr double kGoalReward = 10.0;

  GridWorldEnv(std::size_t num_envs, std::uint64_t seed, std::size_t size = 5,
               long max_episode_steps = 100);

  std::vector<double> reset() override;
  StepResult step(std::span<const double> actions) override;

  std::size_t size() const { return size_; }
  std::size_t goal_state() const { return size_ * size_ - 1; }

  // Successor cell under the deterministic move rule.
  std::size_t next_state(std::size_t state, std::size_t action) const;

 private:
  std::size_t size_;
  long max_episode_steps_;
  std::vector<std::size_t> state_;
  std::vector<long> episode_steps_;
};

}  // namespace vecrl
