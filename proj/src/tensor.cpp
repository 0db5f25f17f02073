#include "vecrl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace vecrl {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

namespace detail {

enum class Op {
  Add, Sub, Mul, Div, Minimum, Maximum,
  AddScalar, MulScalar, RsubScalar,
  MatMul,
  Tanh, Relu, Exp, Log, Square, Sqrt, Clamp,
  Sum, Mean, SumRows, MeanRows,
  Softmax, LogSoftmax,
  GatherRows, Concat, Broadcast,
  Custom,
};

struct GraphNode {
  Op op;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  double c0 = 0.0, c1 = 0.0;          // op constants (clamp bounds, scalars)
  std::vector<std::size_t> indices;   // gather indices / concat split point
  std::function<void(std::span<const double>, std::vector<std::span<double>>&)> custom;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> value;
  bool requires_grad = false;
  std::vector<double> grad;
  std::unique_ptr<GraphNode> node;
};

}  // namespace detail

using detail::GraphNode;
using detail::Op;
using detail::TensorImpl;

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string("tensor op '") + op + "': incompatible shapes " +
                              shape_str(a) + " and " + shape_str(b));
}

[[noreturn]] void shape_error(const char* op, const Shape& a) {
  throw std::invalid_argument(std::string("tensor op '") + op + "': unsupported shape " +
                              shape_str(a));
}

std::shared_ptr<TensorImpl> make_impl(Shape shape, std::vector<double> value,
                                      bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->value = std::move(value);
  impl->requires_grad = requires_grad;
  return impl;
}

}  // namespace

// --- Tensor handle ----------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::size_t n = shape_numel(shape);
  return Tensor(make_impl(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::size_t n = shape_numel(shape);
  return Tensor(make_impl(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw std::invalid_argument("Tensor::from_data: shape " + shape_str(shape) + " needs " +
                                std::to_string(shape_numel(shape)) + " values, got " +
                                std::to_string(data.size()));
  }
  return Tensor(make_impl(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(make_impl({}, {value}, requires_grad));
}

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::numel() const { return impl_->value.size(); }
bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
bool Tensor::is_leaf() const { return impl_ && impl_->node == nullptr; }

std::span<const double> Tensor::data() const { return impl_->value; }

std::span<double> Tensor::mutable_data() {
  if (!is_leaf()) {
    throw std::logic_error("mutable_data: only leaf tensors may be mutated in place");
  }
  return impl_->value;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw std::logic_error("item: tensor of shape " + shape_str(shape()) + " is not a scalar");
  }
  return impl_->value[0];
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->value.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  return Tensor(make_impl(impl_->shape, impl_->value, false));
}

// --- op construction --------------------------------------------------------

class OpBuilder {
 public:
  static std::shared_ptr<TensorImpl> impl_of(const Tensor& t) { return t.impl_; }

  static Tensor make(Op op, Shape shape, std::vector<double> value,
                     std::vector<Tensor> parents, double c0 = 0.0, double c1 = 0.0,
                     std::vector<std::size_t> indices = {}) {
    bool rg = false;
    for (const Tensor& p : parents) rg = rg || p.requires_grad();
    auto impl = make_impl(std::move(shape), std::move(value), rg);
    if (rg) {
      auto node = std::make_unique<GraphNode>();
      node->op = op;
      node->c0 = c0;
      node->c1 = c1;
      node->indices = std::move(indices);
      for (Tensor& p : parents) node->parents.push_back(std::move(p.impl_));
      impl->node = std::move(node);
    }
    return Tensor(std::move(impl));
  }
};

namespace {

// Broadcast classification for binary elementwise ops.
enum class Bcast { None, AScalar, BScalar, ALead, BLead };

Bcast classify_broadcast(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return Bcast::None;
  std::size_t na = shape_numel(a), nb = shape_numel(b);
  if (nb == 1) return Bcast::BScalar;
  if (na == 1) return Bcast::AScalar;
  auto suffix = [](const Shape& big, const Shape& small) {
    if (big.size() <= small.size()) return false;
    return std::equal(small.rbegin(), small.rend(), big.rbegin());
  };
  if (suffix(a, b)) return Bcast::BLead;
  if (suffix(b, a)) return Bcast::ALead;
  shape_error(op, a, b);
}

Tensor expand(const Tensor& t, const Shape& target) { return broadcast_to(t, target); }

template <typename F>
Tensor binary_elementwise(Op op, const char* name, const Tensor& a, const Tensor& b, F f) {
  Bcast bc = classify_broadcast(name, a.shape(), b.shape());
  if (bc == Bcast::BScalar || bc == Bcast::BLead) {
    return binary_elementwise(op, name, a, expand(b, a.shape()), f);
  }
  if (bc == Bcast::AScalar || bc == Bcast::ALead) {
    return binary_elementwise(op, name, expand(a, b.shape()), b, f);
  }
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i], bv[i]);
  return OpBuilder::make(op, a.shape(), std::move(out), {a, b});
}

template <typename F>
Tensor unary_elementwise(Op op, const Tensor& a, F f, double c0 = 0.0, double c1 = 0.0) {
  auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  return OpBuilder::make(op, a.shape(), std::move(out), {a}, c0, c1);
}

// Rows/cols view of a rank-1 or rank-2 tensor (rank-1 treated as one row).
std::pair<std::size_t, std::size_t> rows_cols(const char* op, const Tensor& t) {
  if (t.rank() == 1) return {1, t.shape()[0]};
  if (t.rank() == 2) return {t.shape()[0], t.shape()[1]};
  shape_error(op, t.shape());
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(Op::Add, "add", a, b, [](double x, double y) { return x + y; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(Op::Sub, "sub", a, b, [](double x, double y) { return x - y; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(Op::Mul, "mul", a, b, [](double x, double y) { return x * y; });
}
Tensor div(const Tensor& a, const Tensor& b) {
  return binary_elementwise(Op::Div, "div", a, b, [](double x, double y) { return x / y; });
}
Tensor minimum(const Tensor& a, const Tensor& b) {
  return binary_elementwise(Op::Minimum, "minimum", a, b,
                            [](double x, double y) { return x <= y ? x : y; });
}
Tensor maximum(const Tensor& a, const Tensor& b) {
  return binary_elementwise(Op::Maximum, "maximum", a, b,
                            [](double x, double y) { return x >= y ? x : y; });
}

Tensor add(const Tensor& a, double c) {
  return unary_elementwise(Op::AddScalar, a, [c](double x) { return x + c; }, c);
}
Tensor sub(const Tensor& a, double c) { return add(a, -c); }
Tensor sub(double c, const Tensor& a) {
  return unary_elementwise(Op::RsubScalar, a, [c](double x) { return c - x; }, c);
}
Tensor mul(const Tensor& a, double c) {
  return unary_elementwise(Op::MulScalar, a, [c](double x) { return x * c; }, c);
}
Tensor div(const Tensor& a, double c) { return mul(a, 1.0 / c); }
Tensor neg(const Tensor& a) { return mul(a, -1.0); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    shape_error("matmul", a.shape(), b.shape());
  }
  std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double aip = av[i * k + p];
      const double* brow = bv.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return OpBuilder::make(Op::MatMul, {m, n}, std::move(out), {a, b});
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(Op::Tanh, a, [](double x) { return std::tanh(x); });
}
Tensor relu(const Tensor& a) {
  return unary_elementwise(Op::Relu, a, [](double x) { return x > 0.0 ? x : 0.0; });
}
Tensor exp(const Tensor& a) {
  return unary_elementwise(Op::Exp, a, [](double x) { return std::exp(x); });
}
Tensor log(const Tensor& a) {
  for (double x : a.data()) {
    if (x <= 0.0) {
      throw std::domain_error("tensor op 'log': input " + std::to_string(x) +
                              " outside domain (0, inf)");
    }
  }
  return unary_elementwise(Op::Log, a, [](double x) { return std::log(x); });
}
Tensor square(const Tensor& a) {
  return unary_elementwise(Op::Square, a, [](double x) { return x * x; });
}
Tensor sqrt(const Tensor& a) {
  for (double x : a.data()) {
    if (x < 0.0) {
      throw std::domain_error("tensor op 'sqrt': input " + std::to_string(x) +
                              " outside domain [0, inf)");
    }
  }
  return unary_elementwise(Op::Sqrt, a, [](double x) { return std::sqrt(x); });
}
Tensor clamp(const Tensor& a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("tensor op 'clamp': lo > hi");
  return unary_elementwise(
      Op::Clamp, a, [lo, hi](double x) { return std::min(std::max(x, lo), hi); }, lo, hi);
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  return OpBuilder::make(Op::Sum, {}, {s}, {a});
}
Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  return OpBuilder::make(Op::Mean, {}, {s / static_cast<double>(a.numel())}, {a});
}
Tensor sum_rows(const Tensor& a) {
  auto [rows, cols] = rows_cols("sum_rows", a);
  std::vector<double> out(rows, 0.0);
  auto av = a.data();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[i] += av[i * cols + j];
  }
  return OpBuilder::make(Op::SumRows, {rows}, std::move(out), {a});
}
Tensor mean_rows(const Tensor& a) {
  auto [rows, cols] = rows_cols("mean_rows", a);
  std::vector<double> out(rows, 0.0);
  auto av = a.data();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[i] += av[i * cols + j];
    out[i] /= static_cast<double>(cols);
  }
  return OpBuilder::make(Op::MeanRows, {rows}, std::move(out), {a});
}

namespace {

void softmax_row(const double* in, double* out, std::size_t n) {
  double mx = in[0];
  for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, in[j]);
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::exp(in[j] - mx);
    z += out[j];
  }
  for (std::size_t j = 0; j < n; ++j) out[j] /= z;
}

}  // namespace

Tensor softmax(const Tensor& a) {
  auto [rows, cols] = rows_cols("softmax", a);
  std::vector<double> out(a.numel());
  auto av = a.data();
  for (std::size_t i = 0; i < rows; ++i) softmax_row(av.data() + i * cols, out.data() + i * cols, cols);
  return OpBuilder::make(Op::Softmax, a.shape(), std::move(out), {a});
}

Tensor log_softmax(const Tensor& a) {
  auto [rows, cols] = rows_cols("log_softmax", a);
  std::vector<double> out(a.numel());
  auto av = a.data();
  for (std::size_t i = 0; i < rows; ++i) {
    const double* in = av.data() + i * cols;
    double* o = out.data() + i * cols;
    double mx = in[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += std::exp(in[j] - mx);
    double lz = mx + std::log(z);
    for (std::size_t j = 0; j < cols; ++j) o[j] = in[j] - lz;
  }
  return OpBuilder::make(Op::LogSoftmax, a.shape(), std::move(out), {a});
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> indices) {
  if (a.rank() != 2) shape_error("gather_rows", a.shape());
  std::size_t rows = a.shape()[0], cols = a.shape()[1];
  if (indices.size() != rows) {
    throw std::invalid_argument("tensor op 'gather_rows': " + std::to_string(indices.size()) +
                                " indices for " + std::to_string(rows) + " rows");
  }
  std::vector<double> out(rows);
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  auto av = a.data();
  for (std::size_t i = 0; i < rows; ++i) {
    if (idx[i] >= cols) {
      throw std::out_of_range("tensor op 'gather_rows': index " + std::to_string(idx[i]) +
                              " out of range for " + std::to_string(cols) + " columns");
    }
    out[i] = av[i * cols + idx[i]];
  }
  return OpBuilder::make(Op::GatherRows, {rows}, std::move(out), {a}, 0.0, 0.0, std::move(idx));
}

Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.rank() == 1 && b.rank() == 1) {
    std::vector<double> out;
    out.reserve(a.numel() + b.numel());
    out.insert(out.end(), a.data().begin(), a.data().end());
    out.insert(out.end(), b.data().begin(), b.data().end());
    return OpBuilder::make(Op::Concat, {a.numel() + b.numel()}, std::move(out), {a, b},
                           static_cast<double>(a.numel()));
  }
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[0] != b.shape()[0]) {
    shape_error("concat", a.shape(), b.shape());
  }
  std::size_t rows = a.shape()[0], ca = a.shape()[1], cb = b.shape()[1];
  std::vector<double> out(rows * (ca + cb));
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy_n(av.data() + i * ca, ca, out.data() + i * (ca + cb));
    std::copy_n(bv.data() + i * cb, cb, out.data() + i * (ca + cb) + ca);
  }
  return OpBuilder::make(Op::Concat, {rows, ca + cb}, std::move(out), {a, b},
                         static_cast<double>(ca));
}

Tensor broadcast_to(const Tensor& a, const Shape& shape) {
  std::size_t target = shape_numel(shape);
  if (a.numel() == 1) {
    return OpBuilder::make(Op::Broadcast, shape, std::vector<double>(target, a.data()[0]), {a});
  }
  bool suffix = shape.size() > a.rank() &&
                std::equal(a.shape().rbegin(), a.shape().rend(), shape.rbegin());
  if (!suffix) shape_error("broadcast", a.shape(), shape);
  std::size_t block = a.numel();
  std::size_t repeat = target / block;
  std::vector<double> out(target);
  auto av = a.data();
  for (std::size_t r = 0; r < repeat; ++r) {
    std::copy_n(av.data(), block, out.data() + r * block);
  }
  return OpBuilder::make(Op::Broadcast, shape, std::move(out), {a});
}

Tensor custom_op(const std::string& name, std::vector<Tensor> inputs, std::vector<double> value,
                 Shape shape,
                 std::function<void(std::span<const double>, std::vector<std::span<double>>&)>
                     backward_fn) {
  (void)name;
  if (shape_numel(shape) != value.size()) {
    throw std::invalid_argument("custom_op '" + name + "': value size does not match shape");
  }
  Tensor out = OpBuilder::make(Op::Custom, std::move(shape), std::move(value), inputs);
  if (out.requires_grad()) {
    // OpBuilder moved the parent handles; fetch the node to attach the rule.
    OpBuilder::impl_of(out)->node->custom = std::move(backward_fn);
  }
  return out;
}

// --- backward engine --------------------------------------------------------

namespace {

struct BackwardCtx {
  std::unordered_map<TensorImpl*, std::vector<double>> adjoint;

  std::vector<double>& buffer(TensorImpl* impl) {
    auto it = adjoint.find(impl);
    if (it == adjoint.end()) {
      it = adjoint.emplace(impl, std::vector<double>(impl->value.size(), 0.0)).first;
    }
    return it->second;
  }
};

void backprop_node(TensorImpl* out, std::span<const double> g, BackwardCtx& ctx) {
  GraphNode& node = *out->node;
  auto want = [](const std::shared_ptr<TensorImpl>& p) { return p->requires_grad; };
  auto gbuf = [&](std::size_t i) -> std::vector<double>& { return ctx.buffer(node.parents[i].get()); };

  switch (node.op) {
    case Op::Add: {
      for (std::size_t side = 0; side < 2; ++side) {
        if (!want(node.parents[side])) continue;
        auto& pg = gbuf(side);
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
      }
      break;
    }
    case Op::Sub: {
      if (want(node.parents[0])) {
        auto& pg = gbuf(0);
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
      }
      if (want(node.parents[1])) {
        auto& pg = gbuf(1);
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] -= g[i];
      }
      break;
    }
    case Op::Mul: {
      const auto& a = node.parents[0]->value;
      const auto& b = node.parents[1]->value;
      if (want(node.parents[0])) {
        auto& pg = gbuf(0);
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * b[i];
      }
      if (want(node.parents[1])) {
        auto& pg = gbuf(1);
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * a[i];
      }
      break;
    }
    case Op::Div: {
      const auto& a = node.parents[0]->value;
      const auto& b = node.parents[1]->value;
      if (want(node.parents[0])) {
        auto& pg = gbuf(0);
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] / b[i];
      }
      if (want(node.parents[1])) {
        auto& pg = gbuf(1);
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] -= g[i] * a[i] / (b[i] * b[i]);
      }
      break;
    }
    case Op::Minimum:
    case Op::Maximum: {
      const auto& a = node.parents[0]->value;
      const auto& b = node.parents[1]->value;
      bool is_min = node.op == Op::Minimum;
      for (std::size_t i = 0; i < g.size(); ++i) {
        bool first = is_min ? (a[i] <= b[i]) : (a[i] >= b[i]);
        std::size_t side = first ? 0 : 1;
        if (want(node.parents[side])) ctx.buffer(node.parents[side].get())[i] += g[i];
      }
      break;
    }
    case Op::AddScalar: {
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
      break;
    }
    case Op::RsubScalar: {
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] -= g[i];
      break;
    }
    case Op::MulScalar: {
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * node.c0;
      break;
    }
    case Op::MatMul: {
      const auto& A = node.parents[0];
      const auto& B = node.parents[1];
      std::size_t m = A->shape[0], k = A->shape[1], n = B->shape[1];
      if (want(A)) {
        auto& pg = gbuf(0);  // gA = g * B^T
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            double gij = g[i * n + j];
            const double* brow = B->value.data() + j;
            double* arow = pg.data() + i * k;
            for (std::size_t p = 0; p < k; ++p) arow[p] += gij * brow[p * n];
          }
        }
      }
      if (want(B)) {
        auto& pg = gbuf(1);  // gB = A^T * g
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double aip = A->value[i * k + p];
            const double* grow = g.data() + i * n;
            double* brow = pg.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) brow[j] += aip * grow[j];
          }
        }
      }
      break;
    }
    case Op::Tanh: {
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * (1.0 - out->value[i] * out->value[i]);
      break;
    }
    case Op::Relu: {
      const auto& x = node.parents[0]->value;
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (x[i] > 0.0) pg[i] += g[i];
      }
      break;
    }
    case Op::Exp: {
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * out->value[i];
      break;
    }
    case Op::Log: {
      const auto& x = node.parents[0]->value;
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] / x[i];
      break;
    }
    case Op::Square: {
      const auto& x = node.parents[0]->value;
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * 2.0 * x[i];
      break;
    }
    case Op::Sqrt: {
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * 0.5 / out->value[i];
      break;
    }
    case Op::Clamp: {
      const auto& x = node.parents[0]->value;
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (x[i] > node.c0 && x[i] < node.c1) pg[i] += g[i];
      }
      break;
    }
    case Op::Sum: {
      auto& pg = gbuf(0);
      for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += g[0];
      break;
    }
    case Op::Mean: {
      auto& pg = gbuf(0);
      double s = g[0] / static_cast<double>(pg.size());
      for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += s;
      break;
    }
    case Op::SumRows:
    case Op::MeanRows: {
      auto& pg = gbuf(0);
      std::size_t rows = out->value.size();
      std::size_t cols = pg.size() / rows;
      double scale = node.op == Op::MeanRows ? 1.0 / static_cast<double>(cols) : 1.0;
      for (std::size_t i = 0; i < rows; ++i) {
        double gi = g[i] * scale;
        for (std::size_t j = 0; j < cols; ++j) pg[i * cols + j] += gi;
      }
      break;
    }
    case Op::Softmax: {
      // g_in = p * (g - sum(p * g)) per row
      auto& pg = gbuf(0);
      std::size_t cols = out->shape.back();
      std::size_t rows = out->value.size() / cols;
      for (std::size_t i = 0; i < rows; ++i) {
        const double* p = out->value.data() + i * cols;
        const double* gi = g.data() + i * cols;
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dot += p[j] * gi[j];
        for (std::size_t j = 0; j < cols; ++j) pg[i * cols + j] += p[j] * (gi[j] - dot);
      }
      break;
    }
    case Op::LogSoftmax: {
      // g_in = g - softmax * sum(g) per row
      auto& pg = gbuf(0);
      std::size_t cols = out->shape.back();
      std::size_t rows = out->value.size() / cols;
      for (std::size_t i = 0; i < rows; ++i) {
        const double* ls = out->value.data() + i * cols;
        const double* gi = g.data() + i * cols;
        double gs = 0.0;
        for (std::size_t j = 0; j < cols; ++j) gs += gi[j];
        for (std::size_t j = 0; j < cols; ++j) {
          pg[i * cols + j] += gi[j] - std::exp(ls[j]) * gs;
        }
      }
      break;
    }
    case Op::GatherRows: {
      auto& pg = gbuf(0);
      std::size_t cols = node.parents[0]->shape[1];
      for (std::size_t i = 0; i < g.size(); ++i) pg[i * cols + node.indices[i]] += g[i];
      break;
    }
    case Op::Concat: {
      auto ca = static_cast<std::size_t>(node.c0);
      if (out->shape.size() == 1) {
        if (want(node.parents[0])) {
          auto& pg = gbuf(0);
          for (std::size_t i = 0; i < ca; ++i) pg[i] += g[i];
        }
        if (want(node.parents[1])) {
          auto& pg = gbuf(1);
          for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += g[ca + i];
        }
      } else {
        std::size_t rows = out->shape[0], cols = out->shape[1], cb = cols - ca;
        if (want(node.parents[0])) {
          auto& pg = gbuf(0);
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < ca; ++j) pg[i * ca + j] += g[i * cols + j];
          }
        }
        if (want(node.parents[1])) {
          auto& pg = gbuf(1);
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cb; ++j) pg[i * cb + j] += g[i * cols + ca + j];
          }
        }
      }
      break;
    }
    case Op::Broadcast: {
      auto& pg = gbuf(0);
      if (pg.size() == 1) {
        double s = 0.0;
        for (double x : g) s += x;
        pg[0] += s;
      } else {
        std::size_t block = pg.size();
        std::size_t repeat = g.size() / block;
        for (std::size_t r = 0; r < repeat; ++r) {
          for (std::size_t i = 0; i < block; ++i) pg[i] += g[r * block + i];
        }
      }
      break;
    }
    case Op::Custom: {
      std::vector<std::vector<double>*> bufs;
      std::vector<std::span<double>> spans;
      bufs.reserve(node.parents.size());
      spans.reserve(node.parents.size());
      for (auto& p : node.parents) {
        bufs.push_back(&ctx.buffer(p.get()));
        spans.emplace_back(*bufs.back());
      }
      node.custom(g, spans);
      break;
    }
  }
}

}  // namespace

void backward(const Tensor& root) {
  if (!root.defined() || root.rank() != 0) {
    throw std::invalid_argument("backward: root must be a rank-0 scalar tensor");
  }
  TensorImpl* root_impl = root.impl_.get();
  if (!root_impl->requires_grad) return;

  // Iterative post-order DFS -> topological order (parents after children).
  std::vector<TensorImpl*> topo;
  std::unordered_map<TensorImpl*, int> state;  // 0 new, 1 open, 2 done
  std::vector<TensorImpl*> stack{root_impl};
  while (!stack.empty()) {
    TensorImpl* cur = stack.back();
    int& st = state[cur];
    if (st == 0) {
      st = 1;
      if (cur->node) {
        for (auto& p : cur->node->parents) {
          if (p->requires_grad && state[p.get()] == 0) stack.push_back(p.get());
        }
      }
    } else {
      stack.pop_back();
      if (st == 1) {
        st = 2;
        topo.push_back(cur);
      }
    }
  }

  BackwardCtx ctx;
  ctx.buffer(root_impl)[0] = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    TensorImpl* impl = *it;
    auto found = ctx.adjoint.find(impl);
    if (found == ctx.adjoint.end()) continue;
    if (impl->node) {
      backprop_node(impl, found->second, ctx);
    } else {
      if (impl->grad.empty()) impl->grad.assign(impl->value.size(), 0.0);
      for (std::size_t i = 0; i < impl->grad.size(); ++i) impl->grad[i] += found->second[i];
    }
  }
}

double grad_check(const std::function<Tensor()>& function, std::vector<Tensor> params,
                  double eps) {
  for (Tensor& p : params) p.zero_grad();
  backward(function());
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Tensor& p : params) {
    analytic.emplace_back(p.grad().begin(), p.grad().end());
    if (analytic.back().empty()) analytic.back().assign(p.numel(), 0.0);
  }

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto vals = params[pi].mutable_data();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      double keep = vals[i];
      vals[i] = keep + eps;
      double fp = function().item();
      vals[i] = keep - eps;
      double fm = function().item();
      vals[i] = keep;
      double numeric = (fp - fm) / (2.0 * eps);
      double a = analytic[pi][i];
      double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace vecrl
