#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vecrl {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {
struct TensorImpl;
struct GraphNode;
}  // namespace detail

// Dense 64-bit float tensor participating in a reverse-mode graph.
// A Tensor is a shared handle: copies alias the same storage. Values are
// immutable after creation except through mutable_data() (optimizer updates
// on leaves) and the grad buffer.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  bool requires_grad() const;
  bool is_leaf() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();  // leaves only; used by optimizers
  double item() const;               // numel() == 1

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Value copy detached from any graph, requires_grad = false.
  Tensor detach() const;

  friend void backward(const Tensor& root);
  friend Tensor custom_op(const std::string& name, std::vector<Tensor> inputs,
                          std::vector<double> value, Shape shape,
                          std::function<void(std::span<const double>,
                                             std::vector<std::span<double>>&)> backward_fn);
  friend class OpBuilder;

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::TensorImpl> impl_;
};

// --- operation catalog ------------------------------------------------------
// Binary elementwise ops accept equal shapes, a one-element operand, or a
// trailing-shape operand broadcast over leading dimensions ([B,n] op [n]).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);  // ties route grad to a
Tensor maximum(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, double c);
Tensor sub(const Tensor& a, double c);
Tensor sub(double c, const Tensor& a);
Tensor mul(const Tensor& a, double c);
Tensor div(const Tensor& a, double c);
Tensor neg(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);  // rank-2 x rank-2

Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // domain error for x <= 0
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);  // domain error for x < 0
Tensor clamp(const Tensor& a, double lo, double hi);  // grad 0 at/after bounds

Tensor sum(const Tensor& a);        // -> rank-0
Tensor mean(const Tensor& a);       // -> rank-0
Tensor sum_rows(const Tensor& a);   // [B,n] -> [B]
Tensor mean_rows(const Tensor& a);  // [B,n] -> [B]

Tensor softmax(const Tensor& a);      // over last dim; rank 1 or 2
Tensor log_softmax(const Tensor& a);  // over last dim; rank 1 or 2

// Row gather: x [B,n], indices [B] -> [B].
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> indices);

// Column concat: [B,m],[B,n] -> [B,m+n] (rank-1 operands concat to rank-1).
Tensor concat(const Tensor& a, const Tensor& b);

// Explicit broadcast: one-element to any shape, or [n...] to [B,n...].
Tensor broadcast_to(const Tensor& a, const Shape& shape);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator+(const Tensor& a, double c) { return add(a, c); }
inline Tensor operator-(const Tensor& a, double c) { return sub(a, c); }
inline Tensor operator*(const Tensor& a, double c) { return mul(a, c); }
inline Tensor operator/(const Tensor& a, double c) { return div(a, c); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

// Reverse-mode sweep from a rank-0 root. Gradients of requires_grad leaves
// accumulate additively into their grad buffers (zero them explicitly
// between updates).
void backward(const Tensor& root);

// Extension point: an op with caller-supplied forward value and backward
// rule. backward_fn receives the output adjoint and one adjoint span per
// input (aligned with `inputs`) to accumulate into.
Tensor custom_op(const std::string& name, std::vector<Tensor> inputs,
                 std::vector<double> value, Shape shape,
                 std::function<void(std::span<const double>,
                                    std::vector<std::span<double>>&)> backward_fn);

// Max over all parameter coordinates of |analytic - numeric| /
// max(1e-8, |analytic| + |numeric|), numeric via central differences of the
// scalar-valued function.
double grad_check(const std::function<Tensor()>& function, std::vector<Tensor> params,
                  double eps);

}  // namespace vecrl
