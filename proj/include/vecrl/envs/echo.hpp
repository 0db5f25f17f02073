#pragma once

#include "vecrl/env.hpp"

namespace vecrl {

// Test environment whose step reports back the exact actions it received
// under infos[i]["action"]. Observation = previous action, reward 0,
// episodes never end. Used as the oracle for action-routing checks.
class EchoEnv final : public VecEnv {
 public:
  EchoEnv(std::size_t num_envs, std::size_t action_dim = 1, double bound = 1.0);

  std::vector<double> reset() override;
  StepResult step(std::span<const double> actions) override;

 private:
  std::vector<double> last_actions_;
};

}  // namespace vecrl
