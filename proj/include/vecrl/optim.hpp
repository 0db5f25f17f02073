#pragma once

#include <span>
#include <vector>

#include "vecrl/tensor.hpp"

namespace vecrl {

// Adaptive-moment optimizer over a fixed parameter list. Gradients are read
// from each parameter's grad buffer; callers zero grads explicitly between
// updates (zero_grad).
class Adam {
 public:
  Adam(std::vector<Tensor> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  void zero_grad();

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  long step_count() const { return step_count_; }

  const std::vector<Tensor>& params() const { return params_; }

  // Optimizer state as flat tensors, for checkpointing. Layout per parameter:
  // first moment, second moment; plus one scalar step counter.
  std::vector<std::pair<std::string, Tensor>> state_tensors(const std::string& prefix) const;
  void load_state(const std::string& prefix,
                  const std::vector<std::pair<std::string, Tensor>>& tensors);

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
};

// Scales all grads by max_norm/norm when the global L2 norm exceeds max_norm.
// Returns the pre-clip norm.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

}  // namespace vecrl
