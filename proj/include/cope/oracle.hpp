#pragma once

// Brute-force evaluation of explicit (unfactorized) polynomial expansions in
// two or three vector variables. Every mode product is materialized, so this
// is only meant for small dimensions; it is the ground truth the factorized
// models are checked against.
//
// Two variables: for n in [1, N] and rho in [1, n + 1], W[n,rho] has shape
// o x d... (n trailing modes). Modes 2..rho are contracted with z_I and modes
// rho+1..n+1 with z_II.
//
// Three variables: W[n,rho,delta] with rho <= delta <= n + 1; modes 2..rho take
// z_I, rho+1..delta take z_II and delta+1..n+1 take z_III.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "cope/models.hpp"
#include "cope/tensor.hpp"

namespace cope {

/// Largest order / dimension the oracle accepts.
inline constexpr std::size_t kOracleMaxOrder = 4;
inline constexpr std::size_t kOracleMaxDim = 8;

struct TermIndex {
  std::size_t n;
  std::size_t rho;
  std::size_t delta = 0;  // three-variable expansions only

  auto operator<=>(const TermIndex&) const = default;
};

class OracleParams {
 public:
  /// All tensors zero, beta zero.
  OracleParams(std::size_t order, std::vector<std::size_t> input_dims, std::size_t out_dim);

  std::size_t order() const { return order_; }
  std::size_t variables() const { return input_dims_.size(); }
  const std::vector<std::size_t>& input_dims() const { return input_dims_; }
  std::size_t out_dim() const { return out_dim_; }

  /// Expected tensor shape for a term.
  Shape term_shape(const TermIndex& idx) const;
  /// Every term index required at this order, in ascending order.
  std::vector<TermIndex> terms() const;

  DenseTensor& tensor(const TermIndex& idx);
  const DenseTensor& tensor(const TermIndex& idx) const;
  Vector& beta() { return beta_; }
  const Vector& beta() const { return beta_; }

  void validate() const;

 private:
  void check_index(const TermIndex& idx) const;

  std::size_t order_;
  std::vector<std::size_t> input_dims_;
  std::size_t out_dim_;
  std::map<TermIndex, DenseTensor> tensors_;
  Vector beta_;
};

/// Explicit polynomial, evaluated term by term with mode_vec_product.
Vector eval_explicit(const OracleParams& params, std::span<const Vector> inputs);

/// Coefficients of one output coordinate of a second-order two-variable
/// expansion, written elementwise:
///   beta + sum_l [w11_l zII_l + w12_l zI_l
///                 + sum_m (w21_lm zII_l zII_m + w23_lm zI_l zI_m + w22_lm zI_l zII_m)]
struct ScalarSecondOrder {
  Vector w11;  // d_II
  Vector w12;  // d_I
  Matrix w21;  // d_II x d_II
  Matrix w23;  // d_I x d_I
  Matrix w22;  // d_I x d_II
  double beta = 0.0;
};

double eval_scalar_second_order(const ScalarSecondOrder& w, std::span<const double> z1, std::span<const double> z2);

/// Folds scalar coefficient sets (one per output coordinate) into OracleParams.
OracleParams oracle_from_scalar(std::span<const ScalarSecondOrder> per_output);

/// Materializes the explicit tensors implied by a second-order, two-variable
/// CCP factorization. The cross tensor W[2,2] is the sum of both symmetric
/// Khatri-Rao terms, each laid out with its z_I factor on mode 2.
OracleParams build_order2_coupled_tensors(const CopeParams& factors);

struct DegreeReport {
  std::size_t degree = 0;
  /// Set when no difference up to max_order + 1 vanished; `degree` is then
  /// max_order and only a lower bound.
  bool saturated = false;
};

/// Numerical total degree of f along the ray base + t * direction, for
/// integer t in [0, max_order + 1]. The probed scalar is the component sum of
/// f. Forward differences of order j are compared against 1e-6 times the
/// largest sampled magnitude; the degree is the highest order that does not
/// vanish.
DegreeReport degree_probe(const std::function<Vector(std::span<const double>)>& f, std::span<const double> base,
                          std::span<const double> direction, std::size_t max_order = 10);

/// Same, on an already-scalar function of t.
DegreeReport degree_probe_scalar(const std::function<double(double)>& g, std::size_t max_order = 10);

}  // namespace cope
