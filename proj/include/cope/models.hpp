#pragma once

// Recursive polynomial models of several input variables.
//
//   CCP       y_1 = sum_phi U[1,phi]^T z_phi
//             y_n = y_{n-1} + (sum_phi U[n,phi]^T z_phi) * y_{n-1}
//   NCP       y_1 = (sum_phi A[1,phi]^T z_phi) * (B[1]^T b[1])
//             y_n = (sum_phi A[n,phi]^T z_phi) * (V[n]^T y_{n-1} + B[n]^T b[n])
//   SPADE     y_1 = A[1,I]^T z_I
//             y_n = (A[n,II]^T z_II) * (V[n]^T y_{n-1} + B[n]^T b[n])
//   additive  NCP with every Hadamard product replaced by a sum (y_0 = 0)
//   Pi-Net    y_1 = L[1]^T z,  y_n = (L[n]^T z) * y_{n-1} + y_{n-1}
//
// and the output of every block is C y_N + beta (Gamma y_N + beta for Pi-Net).
// `*` is the Hadamard product. Variables are indexed from 0 (phi = I is 0).
//
// Factors play fixed roles (input embedding, recursion matrix, scaling);
// all are dense here.

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cope/autodiff.hpp"
#include "cope/tensor.hpp"

namespace cope {

enum class Variant { Ccp, Ncp };

/// Parameters of one CCP or NCP polynomial block. Orders are 1-based,
/// variables 0-based. Vector-valued parameters (b[n], beta) are 1 x len rows.
class CopeParams {
 public:
  CopeParams(Variant variant, std::size_t order, std::vector<std::size_t> input_dims, std::size_t rank,
             std::size_t out_dim, std::size_t omega = 0, bool share_conditional = false);

  Variant variant() const { return variant_; }
  std::size_t order() const { return order_; }
  std::size_t variables() const { return input_dims_.size(); }
  const std::vector<std::size_t>& input_dims() const { return input_dims_; }
  std::size_t rank() const { return rank_; }
  std::size_t out_dim() const { return out_dim_; }
  std::size_t omega() const { return omega_; }
  /// U[n,phi] (A[n,phi]) == U[1,phi] for every conditional variable phi >= 1.
  bool share_conditional() const { return share_conditional_; }

  /// Input factor for order n and variable phi, d_phi x k. Resolves sharing.
  Matrix& factor(std::size_t n, std::size_t phi);
  const Matrix& factor(std::size_t n, std::size_t phi) const;
  /// NCP-shaped parameters; V exists for n >= 2 only.
  Matrix& V(std::size_t n);
  const Matrix& V(std::size_t n) const;
  Matrix& B(std::size_t n);
  const Matrix& B(std::size_t n) const;
  Matrix& b(std::size_t n);
  const Matrix& b(std::size_t n) const;
  Matrix& C() { return C_; }
  const Matrix& C() const { return C_; }
  Matrix& beta() { return beta_; }
  const Matrix& beta() const { return beta_; }

  bool is_shared(std::size_t n, std::size_t phi) const { return share_conditional_ && n >= 2 && phi >= 1; }

  /// Visits each distinct parameter once, in a fixed order, with its name.
  template <class F>
  void for_each_parameter(F&& f);
  template <class F>
  void for_each_parameter(F&& f) const;

  std::size_t parameter_count() const;
  void validate() const;

 private:
  std::size_t check_order(std::size_t n, const char* what) const;

  Variant variant_;
  std::size_t order_;
  std::vector<std::size_t> input_dims_;
  std::size_t rank_;
  std::size_t out_dim_;
  std::size_t omega_;
  bool share_conditional_;
  std::vector<std::vector<Matrix>> factors_;  // [n-1][phi]; shared slots stay empty
  std::vector<Matrix> V_;                     // [n-1], n >= 2
  std::vector<Matrix> B_;
  std::vector<Matrix> b_;
  Matrix C_;
  Matrix beta_;
};

/// Single-variable polynomial on a (possibly concatenated) input.
struct PiNetParams {
  PiNetParams(std::size_t order, std::size_t in_dim, std::size_t rank, std::size_t out_dim);

  std::size_t order() const { return lambda.size(); }
  std::size_t in_dim() const { return lambda.front().rows(); }
  std::size_t rank() const { return gamma.cols(); }
  std::size_t out_dim() const { return gamma.rows(); }
  void validate() const;

  std::vector<Matrix> lambda;  // [n-1]: in_dim x k
  Matrix gamma;                // o x k
  Matrix beta;                 // 1 x o
};

/// Linear map on the concatenated inputs, P^T [z_I; z_II; ...].
struct ConcatParams {
  ConcatParams(std::size_t in_dim, std::size_t out_dim) : P(in_dim, out_dim) {}
  Matrix P;  // (sum d_phi) x o
};

// -- forwards on single samples ---------------------------------------------

Vector ccp_forward(const CopeParams& p, std::span<const Vector> inputs);
Vector ncp_forward(const CopeParams& p, std::span<const Vector> inputs);
/// Dedicated SPADE recursion on NCP-shaped parameters; uses A[1,I] and
/// A[n,II] for n >= 2 only. Two variables.
Vector spade_forward(const CopeParams& p, std::span<const Vector> inputs);
Vector additive_forward(const CopeParams& p, std::span<const Vector> inputs);
Vector pinet_forward(const PiNetParams& p, std::span<const double> z);
Vector concat_linear_forward(const Matrix& P, std::span<const Vector> inputs);

// -- product chains -----------------------------------------------------------

enum class BlockKind { Ccp, Ncp, Spade, Additive, PiNet, ConcatLinear };
enum class Activation { None, Tanh };
enum class Centering { None, BatchMean };

std::string to_string(BlockKind kind);
BlockKind block_kind_from_string(const std::string& name);

/// Which signals a block consumes, in this order: the previous block's output
/// (when `previous` is set), then the listed original variables.
struct BlockInputs {
  bool previous = false;
  std::vector<std::size_t> variables;
};

struct Block {
  BlockKind kind;
  std::variant<CopeParams, PiNetParams, ConcatParams> params;
  BlockInputs inputs;

  std::size_t out_dim() const;
};

struct ModelSpec {
  std::vector<std::size_t> variable_dims;
  std::vector<Block> chain;
  Activation output_activation = Activation::None;
  Centering centering = Centering::None;

  std::size_t output_dim() const;
  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
  template <class F>
  void for_each_parameter(F&& f);
  template <class F>
  void for_each_parameter(F&& f) const;
  std::size_t parameter_count() const;
};

/// Batched forward: one sample per row of each variable matrix.
Matrix product_compose(const ModelSpec& spec, std::span<const Matrix> variables);
Vector product_compose(const ModelSpec& spec, std::span<const Vector> variables);

/// Flat view of a model's parameters, ids assigned in visiting order. Holds
/// pointers into the model, which must outlive it and must not be moved.
class ParameterSet {
 public:
  explicit ParameterSet(ModelSpec& spec);
  explicit ParameterSet(CopeParams& params);
  explicit ParameterSet(PiNetParams& params);

  std::size_t size() const { return params_.size(); }
  Matrix& operator[](ad::ParamId id) { return *params_.at(id); }
  const Matrix& operator[](ad::ParamId id) const { return *params_.at(id); }
  const std::string& name(ad::ParamId id) const { return names_.at(id); }
  std::span<Matrix* const> pointers() const { return params_; }
  std::optional<ad::ParamId> find(const Matrix* m) const;

 private:
  void add(const std::string& name, Matrix& m);

  std::vector<Matrix*> params_;
  std::vector<std::string> names_;
  std::unordered_map<const Matrix*, ad::ParamId> ids_;
};

/// Records the batched forward on a tape. Matrices registered in `params`
/// become trainable leaves; anything else is a constant.
ad::NodeId product_compose(ad::Tape& tape, const ParameterSet& params, const ModelSpec& spec,
                           std::span<const ad::NodeId> variables);
ad::NodeId block_forward(ad::Tape& tape, const ParameterSet& params, const Block& block,
                         std::span<const ad::NodeId> inputs);

// -- construction helpers -----------------------------------------------------

struct InitOptions {
  /// Factor entries uniform on [-s, s]; s <= 0 selects 1/sqrt(k).
  double scale = 0.0;
  /// Scaling vectors b[n] start at one.
  bool ones_for_scaling = true;
  /// Biases start at zero unless set.
  bool random_bias = false;
};

void initialize(CopeParams& p, std::mt19937_64& rng, const InitOptions& opt = {});
void initialize(PiNetParams& p, std::mt19937_64& rng, const InitOptions& opt = {});
void initialize(ModelSpec& spec, std::mt19937_64& rng, const InitOptions& opt = {});

/// Single-block model wrapping `block` with the given variable dims; the block
/// consumes every variable.
ModelSpec single_block_model(Block block, std::vector<std::size_t> variable_dims);

// -- template definitions -----------------------------------------------------

namespace detail {
std::string roman(std::size_t phi);
}

template <class F>
void CopeParams::for_each_parameter(F&& f) {
  const char* u = variant_ == Variant::Ccp ? "U" : "A";
  for (std::size_t n = 1; n <= order_; ++n)
    for (std::size_t phi = 0; phi < variables(); ++phi)
      if (!is_shared(n, phi))
        f(std::string(u) + "[" + std::to_string(n) + "," + detail::roman(phi) + "]", factor(n, phi));
  if (variant_ == Variant::Ncp) {
    for (std::size_t n = 2; n <= order_; ++n) f("V[" + std::to_string(n) + "]", V(n));
    for (std::size_t n = 1; n <= order_; ++n) f("B[" + std::to_string(n) + "]", B(n));
    for (std::size_t n = 1; n <= order_; ++n) f("b[" + std::to_string(n) + "]", b(n));
  }
  f(std::string("C"), C_);
  f(std::string("beta"), beta_);
}

template <class F>
void CopeParams::for_each_parameter(F&& f) const {
  const_cast<CopeParams*>(this)->for_each_parameter(
      [&](const std::string& name, const Matrix& m) { f(name, m); });
}

template <class F>
void ModelSpec::for_each_parameter(F&& f) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const std::string prefix = "block" + std::to_string(i) + ".";
    std::visit(
        [&](auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, CopeParams>) {
            p.for_each_parameter([&](const std::string& name, Matrix& m) { f(prefix + name, m); });
          } else if constexpr (std::is_same_v<T, PiNetParams>) {
            for (std::size_t n = 0; n < p.lambda.size(); ++n)
              f(prefix + "Lambda[" + std::to_string(n + 1) + "]", p.lambda[n]);
            f(prefix + "Gamma", p.gamma);
            f(prefix + "beta", p.beta);
          } else {
            f(prefix + "P", p.P);
          }
        },
        chain[i].params);
  }
}

template <class F>
void ModelSpec::for_each_parameter(F&& f) const {
  const_cast<ModelSpec*>(this)->for_each_parameter(
      [&](const std::string& name, const Matrix& m) { f(name, m); });
}

}  // namespace cope
