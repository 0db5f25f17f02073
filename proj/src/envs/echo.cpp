#include "vecrl/envs/echo.hpp"

#include <stdexcept>

namespace vecrl {

EchoEnv::EchoEnv(std::size_t num_envs, std::size_t action_dim, double bound)
    : VecEnv(num_envs,
             Space::box(std::vector<double>(action_dim, -bound),
                        std::vector<double>(action_dim, bound)),
             Space::box(std::vector<double>(action_dim, -bound),
                        std::vector<double>(action_dim, bound))),
      last_actions_(num_envs * action_dim, 0.0) {
  if (action_dim < 1) throw std::invalid_argument("echo: action_dim must be >= 1");
}

std::vector<double> EchoEnv::reset() {
  std::fill(last_actions_.begin(), last_actions_.end(), 0.0);
  return last_actions_;
}

StepResult EchoEnv::step(std::span<const double> actions) {
  check_actions(actions);
  std::size_t dim = act_dim();
  StepResult out;
  out.observations.assign(actions.begin(), actions.end());
  out.rewards.assign(num_envs_, 0.0);
  out.dones.assign(num_envs_, 0);
  out.infos.resize(num_envs_);
  for (std::size_t i = 0; i < num_envs_; ++i) {
    out.infos[i]["action"] =
        std::vector<double>(actions.begin() + i * dim, actions.begin() + (i + 1) * dim);
  }
  last_actions_.assign(actions.begin(), actions.end());
  return out;
}

}  // namespace vecrl
