#include "vecrl/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace vecrl {

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (beta1_ < 0.0 || beta1_ >= 1.0 || beta2_ < 0.0 || beta2_ >= 1.0) {
    throw std::invalid_argument("Adam: betas must lie in [0, 1)");
  }
  if (lr_ <= 0.0) throw std::invalid_argument("Adam: learning rate must be positive");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void Adam::step() {
  ++step_count_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = params_[pi];
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto x = p.mutable_data();
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      x[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

std::vector<std::pair<std::string, Tensor>> Adam::state_tensors(const std::string& prefix) const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.emplace_back(prefix + "/m" + std::to_string(i),
                     Tensor::from_data({m_[i].size()}, m_[i]));
    out.emplace_back(prefix + "/v" + std::to_string(i),
                     Tensor::from_data({v_[i].size()}, v_[i]));
  }
  out.emplace_back(prefix + "/steps", Tensor::scalar(static_cast<double>(step_count_)));
  return out;
}

void Adam::load_state(const std::string& prefix,
                      const std::vector<std::pair<std::string, Tensor>>& tensors) {
  auto find = [&](const std::string& name) -> const Tensor* {
    for (const auto& [n, t] : tensors) {
      if (n == name) return &t;
    }
    return nullptr;
  };
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Tensor* m = find(prefix + "/m" + std::to_string(i));
    const Tensor* v = find(prefix + "/v" + std::to_string(i));
    if (!m || !v || m->numel() != m_[i].size() || v->numel() != v_[i].size()) {
      throw std::runtime_error("Adam::load_state: missing or mismatched state under " + prefix);
    }
    m_[i].assign(m->data().begin(), m->data().end());
    v_[i].assign(v->data().begin(), v->data().end());
  }
  const Tensor* steps = find(prefix + "/steps");
  if (!steps) throw std::runtime_error("Adam::load_state: missing step counter under " + prefix);
  step_count_ = static_cast<long>(steps->item());
}

double clip_grad_norm(std::span<Tensor> params, double max_norm) {
  if (max_norm <= 0.0) throw std::invalid_argument("clip_grad_norm: max_norm must be positive");
  double sq = 0.0;
  for (Tensor& p : params) {
    if (!p.has_grad()) continue;
    for (double g : p.grad()) sq += g * g;
  }
  double norm = std::sqrt(sq);
  if (norm > max_norm) {
    double scale = max_norm / norm;
    for (Tensor& p : params) {
      if (!p.has_grad()) continue;
      for (double& g : p.mutable_grad()) g *= scale;
    }
  }
  return norm;
}

}  // namespace vecrl
