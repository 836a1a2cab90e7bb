#pragma once

// Tape-based reverse-mode differentiation over the small op set the
// polynomial models and losses are built from. Every value on the tape is a
// Matrix; batches are stored one sample per row.

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cope/tensor.hpp"

namespace cope::ad {

using NodeId = std::size_t;
using ParamId = std::size_t;

enum class Op {
  Constant,
  Parameter,
  MatMul,    // a * b
  MatMulNT,  // a * b^T
  Add,
  Sub,
  Hadamard,
  AddRow,  // x + r, r is 1 x cols broadcast over rows
  MulRow,  // x * r, same broadcast
  Scale,
  Tanh,
  LeakyRelu,
  Softplus,
  Abs,
  ClampMax,
  CenterRows,  // subtract the column mean over the batch
  Rows,
  ConcatCols,
  Sum,
  Mean,
  MeanSquaredError,
  MmdRbf,
  ForwardOnly,  // recorded value without a backward rule
};

std::string_view op_name(Op op);

/// Parameter id -> gradient with the parameter's shape.
class GradientMap {
 public:
  bool contains(ParamId id) const { return grads_.count(id) != 0; }
  const Matrix& at(ParamId id) const;
  Matrix& operator[](ParamId id) { return grads_[id]; }
  std::size_t size() const { return grads_.size(); }
  auto begin() const { return grads_.begin(); }
  auto end() const { return grads_.end(); }

 private:
  std::map<ParamId, Matrix> grads_;
};

class Tape {
 public:
  NodeId constant(Matrix value);
  /// Registers (or re-uses) the leaf for parameter `id`. Registering the same
  /// id twice returns the first node, so shared parameters accumulate.
  NodeId parameter(ParamId id, const Matrix& value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId matmul_nt(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId add_row(NodeId x, NodeId row);
  NodeId mul_row(NodeId x, NodeId row);
  NodeId scale(NodeId x, double s);
  NodeId tanh(NodeId x);
  NodeId leaky_relu(NodeId x, double slope);
  NodeId softplus(NodeId x);
  NodeId abs(NodeId x);
  NodeId clamp_max(NodeId x, double limit);
  NodeId center_rows(NodeId x);
  NodeId rows(NodeId x, std::size_t begin, std::size_t end);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId sum(NodeId x);
  NodeId mean(NodeId x);
  /// Mean of squared differences against a fixed target.
  NodeId mse(NodeId pred, const Matrix& target);
  /// Biased squared MMD with RBF kernels, summed over bandwidths, between the
  /// rows of x and the fixed sample y.
  NodeId mmd_rbf(NodeId x, const Matrix& y, std::span<const double> bandwidths);
  /// Records a value computed outside the op set. Backpropagating through it
  /// is an error.
  NodeId forward_only(std::string name, std::vector<NodeId> inputs, Matrix value);

  const Matrix& value(NodeId id) const;
  double scalar(NodeId id) const;
  Op op(NodeId id) const { return nodes_.at(id).op; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t parameter_count() const { return param_nodes_.size(); }

  /// Reverse sweep from `output` seeded with `seed` (same shape as the output).
  /// Every registered parameter gets an entry, zero when unreachable.
  GradientMap backward(NodeId output, const Matrix& seed) const;
  /// Seed 1 for a 1x1 output.
  GradientMap backward(NodeId output) const;

 private:
  struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Matrix value;
    double scalar = 0.0;        // Scale factor, slope, clamp limit
    std::size_t offset = 0;     // Rows begin
    ParamId param = 0;
    Matrix aux;                 // mse target, mmd reference sample
    std::vector<double> bandwidths;
    std::string name;
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;

  std::vector<Node> nodes_;
  std::map<ParamId, NodeId> param_nodes_;
};

/// Central differences with step h, or the Richardson combination
/// (4 D(h/2) - D(h)) / 3 of two of them (error O(h^4) instead of O(h^2)).
enum class FdScheme { Central, Richardson };

/// Finite-difference check of an analytic gradient. `f` evaluates the scalar
/// objective from the current parameter values; `analytic` holds the gradient
/// to check; a missing entry counts as zero. Returns the max over coordinates
/// of |a - fd| / max(|a|, |fd|, 1e-8).
/// Throws if f is non-finite at any probe, naming the coordinate.
double finite_diff_check(const std::function<double()>& f, std::span<Matrix* const> params,
                         const GradientMap& analytic, double h = 1e-5, FdScheme scheme = FdScheme::Central);

/// Same check for a plain function of a flat coordinate vector.
double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, std::span<const double> analytic, double h = 1e-5,
                         FdScheme scheme = FdScheme::Central);

}  // namespace cope::ad
