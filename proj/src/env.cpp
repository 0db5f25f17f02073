#include "vecrl/env.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "vecrl/envs/cartpole.hpp"
#include "vecrl/envs/echo.hpp"
#include "vecrl/envs/gridworld.hpp"
#include "vecrl/envs/pendulum.hpp"

namespace vecrl {

void VecEnv::check_actions(std::span<const double> actions) const {
  std::size_t expected = num_envs_ * act_dim();
  if (actions.size() != expected) {
    throw std::invalid_argument("step: action buffer has " + std::to_string(actions.size()) +
                                " values, expected " + std::to_string(expected) + " (" +
                                std::to_string(num_envs_) + " x " +
                                std::to_string(act_dim()) + ")");
  }
  if (action_space_.kind == Space::Kind::Discrete) {
    for (std::size_t i = 0; i < actions.size(); ++i) {
      double a = actions[i];
      if (a < 0.0 || a >= static_cast<double>(action_space_.n) || a != std::floor(a)) {
        throw std::out_of_range("step: discrete action " + std::to_string(a) + " at row " +
                                std::to_string(i) + " outside [0, " +
                                std::to_string(action_space_.n) + ")");
      }
    }
  }
}

namespace {

void check_params(const std::string& name, const EnvParams& params,
                  const std::set<std::string>& known) {
  for (const auto& [key, value] : params) {
    (void)value;
    if (!known.count(key)) {
      throw std::invalid_argument("make_env(" + name + "): unknown parameter '" + key + "'");
    }
  }
}

double param_or(const EnvParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

std::unique_ptr<VecEnv> make_env(const std::string& name, std::size_t num_envs,
                                 std::uint64_t seed, const EnvParams& params) {
  if (num_envs < 1) throw std::invalid_argument("make_env: num_envs must be >= 1");
  if (name == "cartpole") {
    check_params(name, params, {"max_episode_steps"});
    return std::make_unique<CartPoleEnv>(
        num_envs, seed, static_cast<long>(param_or(params, "max_episode_steps", 500)));
  }
  if (name == "pendulum") {
    check_params(name, params, {"max_episode_steps"});
    return std::make_unique<PendulumEnv>(
        num_envs, seed, static_cast<long>(param_or(params, "max_episode_steps", 200)));
  }
  if (name == "gridworld") {
    check_params(name, params, {"size", "max_episode_steps"});
    double size = param_or(params, "size", 5);
    if (size < 2 || size != std::floor(size)) {
      throw std::invalid_argument("make_env(gridworld): size must be an integer >= 2");
    }
    return std::make_unique<GridWorldEnv>(
        num_envs, seed, static_cast<std::size_t>(size),
        static_cast<long>(param_or(params, "max_episode_steps", 100)));
  }
  if (name == "echo") {
    check_params(name, params, {"action_dim", "bound"});
    return std::make_unique<EchoEnv>(num_envs,
                                     static_cast<std::size_t>(param_or(params, "action_dim", 1)),
                                     param_or(params, "bound", 1.0));
  }
  throw std::invalid_argument("make_env: unknown environment '" + name + "'");
}

namespace {

class WrappedSingleEnv final : public VecEnv {
 public:
  explicit WrappedSingleEnv(ExternalEnv src)
      : VecEnv(1, src.observation_space, src.action_space), src_(std::move(src)) {}

  std::vector<double> reset() override { return src_.reset(); }

  StepResult step(std::span<const double> actions) override {
    check_actions(actions);
    auto [obs, reward, done] = src_.step(actions);
    StepResult out;
    out.rewards = {reward};
    out.dones = {static_cast<std::uint8_t>(done ? 1 : 0)};
    out.infos.resize(1);
    if (done) {
      out.infos[0]["terminal_observation"] = obs;
      out.observations = src_.reset();
    } else {
      out.observations = std::move(obs);
    }
    return out;
  }

 private:
  ExternalEnv src_;
};

class WrappedBatchEnv final : public VecEnv {
 public:
  explicit WrappedBatchEnv(ExternalEnv src)
      : VecEnv(src.num_envs, src.observation_space, src.action_space), src_(std::move(src)) {}

  std::vector<double> reset() override { return src_.reset_batch(); }

  StepResult step(std::span<const double> actions) override {
    check_actions(actions);
    return src_.step_batch(actions);
  }

 private:
  ExternalEnv src_;
};

}  // namespace

std::unique_ptr<VecEnv> wrap(ExternalEnv source) {
  if (source.num_envs < 1) throw std::invalid_argument("wrap: num_envs must be >= 1");
  if (source.num_envs == 1 && source.reset && source.step) {
    return std::make_unique<WrappedSingleEnv>(std::move(source));
  }
  if (source.num_envs > 1 && source.reset_batch && source.step_batch) {
    return std::make_unique<WrappedBatchEnv>(std::move(source));
  }
  std::string missing;
  if (source.num_envs == 1) {
    if (!source.reset) missing += " reset";
    if (!source.step) missing += " step";
  } else {
    if (!source.reset_batch) missing += " reset_batch";
    if (!source.step_batch) missing += " step_batch";
  }
  throw std::invalid_argument("wrap: source is missing required methods:" + missing);
}

}  // namespace vecrl
