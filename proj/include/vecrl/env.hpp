#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vecrl/space.hpp"

namespace vecrl {

// Per-sub-env auxiliary output of a step: string keys to numeric vectors
// (e.g. "terminal_observation" when an episode auto-resets).
using Info = std::map<std::string, std::vector<double>>;

struct StepResult {
  std::vector<double> observations;  // [num_envs * obs_dim]
  std::vector<double> rewards;       // [num_envs]
  std::vector<std::uint8_t> dones;   // [num_envs]
  std::vector<Info> infos;           // [num_envs]
};

// Environment parameters as a key-value record; echoed into run metadata.
using EnvParams = std::map<std::string, double>;

// Batch of identical sub-environments stepped in lockstep. Sub-envs whose
// episode ends inside step() reset immediately; the returned observation for
// those rows is the post-reset one, dones[row] is set, and the pre-reset
// observation is exposed under infos[row]["terminal_observation"].
class VecEnv {
 public:
  virtual ~VecEnv() = default;

  std::size_t num_envs() const { return num_envs_; }
  const std::string& device() const { return device_; }
  const Space& observation_space() const { return observation_space_; }
  const Space& action_space() const { return action_space_; }
  std::size_t obs_dim() const { return observation_space_.flat_dim(); }
  std::size_t act_dim() const { return action_space_.flat_dim(); }

  virtual std::vector<double> reset() = 0;
  virtual StepResult step(std::span<const double> actions) = 0;

 protected:
  VecEnv(std::size_t num_envs, Space obs_space, Space act_space)
      : num_envs_(num_envs),
        observation_space_(std::move(obs_space)),
        action_space_(std::move(act_space)) {}

  // Validates the incoming action buffer shape and discrete ranges.
  void check_actions(std::span<const double> actions) const;

  std::size_t num_envs_;
  std::string device_ = "cpu";
  Space observation_space_;
  Space action_space_;
};

// Factory for the built-in kernels: "cartpole", "pendulum", "gridworld",
// "echo". Unknown parameter keys are rejected.
std::unique_ptr<VecEnv> make_env(const std::string& name, std::size_t num_envs,
                                 std::uint64_t seed, const EnvParams& params = {});

// A foreign environment described as a record of callables; fields left
// empty are reported as missing when wrapping.
struct ExternalEnv {
  Space observation_space;
  Space action_space;
  std::size_t num_envs = 1;  // > 1 means the callables are batched

  // Single-env form: obs out; (obs, reward, done) out.
  std::function<std::vector<double>()> reset;
  std::function<std::tuple<std::vector<double>, double, bool>(std::span<const double>)> step;

  // Batched form (used when num_envs > 1); shapes carry the leading
  // num_envs dimension.
  std::function<std::vector<double>()> reset_batch;
  std::function<StepResult(std::span<const double>)> step_batch;
};

// Uniform VecEnv facade over a foreign source; single-env sources are
// auto-reset and batched with num_envs = 1.
std::unique_ptr<VecEnv> wrap(ExternalEnv source);

}  // namespace vecrl
