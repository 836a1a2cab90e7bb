#include "cope/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cope {

namespace {

std::string term_name(const TermIndex& idx) {
  std::string s = "W[" + std::to_string(idx.n) + "," + std::to_string(idx.rho);
  if (idx.delta) s += "," + std::to_string(idx.delta);
  return s + "]";
}

// Variable feeding tensor mode `mode` (1-based, >= 2) of a term.
std::size_t variable_of_mode(const TermIndex& idx, std::size_t variables, std::size_t mode) {
  if (mode <= idx.rho) return 0;
  if (variables == 2) return 1;
  return mode <= idx.delta ? 1 : 2;
}

void check_oracle_size(std::size_t order, std::span<const std::size_t> dims, std::size_t out_dim) {
  if (order < 1 || order > kOracleMaxOrder) {
    throw std::invalid_argument("oracle: order " + std::to_string(order) + " outside [1, " +
                                std::to_string(kOracleMaxOrder) + "]");
  }
  for (std::size_t d : dims)
    if (d < 1 || d > kOracleMaxDim)
      throw std::invalid_argument("oracle: input dimension " + std::to_string(d) + " outside [1, " +
                                  std::to_string(kOracleMaxDim) + "]");
  if (out_dim < 1 || out_dim > kOracleMaxDim)
    throw std::invalid_argument("oracle: output dimension " + std::to_string(out_dim) + " outside [1, " +
                                std::to_string(kOracleMaxDim) + "]");
}

}  // namespace

OracleParams::OracleParams(std::size_t order, std::vector<std::size_t> input_dims, std::size_t out_dim)
    : order_(order), input_dims_(std::move(input_dims)), out_dim_(out_dim), beta_(out_dim, 0.0) {
  if (input_dims_.size() != 2 && input_dims_.size() != 3) {
    throw std::invalid_argument("OracleParams: two or three variables supported, got " +
                                std::to_string(input_dims_.size()));
  }
  check_oracle_size(order_, input_dims_, out_dim_);
  for (const auto& idx : terms()) tensors_.emplace(idx, DenseTensor(term_shape(idx)));
}

std::vector<TermIndex> OracleParams::terms() const {
  std::vector<TermIndex> out;
  for (std::size_t n = 1; n <= order_; ++n)
    for (std::size_t rho = 1; rho <= n + 1; ++rho) {
      if (variables() == 2) {
        out.push_back({n, rho});
      } else {
        for (std::size_t delta = rho; delta <= n + 1; ++delta) out.push_back({n, rho, delta});
      }
    }
  return out;
}

void OracleParams::check_index(const TermIndex& idx) const {
  const bool ok = idx.n >= 1 && idx.n <= order_ && idx.rho >= 1 && idx.rho <= idx.n + 1 &&
                  (variables() == 2 ? idx.delta == 0 : (idx.delta >= idx.rho && idx.delta <= idx.n + 1));
  if (!ok) throw std::out_of_range("OracleParams: no term " + term_name(idx));
}

Shape OracleParams::term_shape(const TermIndex& idx) const {
  check_index(idx);
  Shape shape{out_dim_};
  for (std::size_t mode = 2; mode <= idx.n + 1; ++mode)
    shape.push_back(input_dims_[variable_of_mode(idx, variables(), mode)]);
  return shape;
}

DenseTensor& OracleParams::tensor(const TermIndex& idx) {
  check_index(idx);
  return tensors_.at(idx);
}

const DenseTensor& OracleParams::tensor(const TermIndex& idx) const {
  check_index(idx);
  return tensors_.at(idx);
}

void OracleParams::validate() const {
  if (beta_.size() != out_dim_) {
    throw std::invalid_argument("OracleParams: beta has length " + std::to_string(beta_.size()) + ", expected " +
                                std::to_string(out_dim_));
  }
  for (const auto& idx : terms()) {
    auto it = tensors_.find(idx);
    if (it == tensors_.end()) throw std::invalid_argument("OracleParams: missing " + term_name(idx));
    if (it->second.shape() != term_shape(idx))
      throw std::invalid_argument("OracleParams: " + term_name(idx) + " has shape " + it->second.shape_string());
  }
}

Vector eval_explicit(const OracleParams& params, std::span<const Vector> inputs) {
  params.validate();
  if (inputs.size() != params.variables()) {
    throw std::invalid_argument("eval_explicit: expected " + std::to_string(params.variables()) + " inputs, got " +
                                std::to_string(inputs.size()));
  }
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    if (inputs[v].size() != params.input_dims()[v]) {
      throw std::invalid_argument("eval_explicit: input " + std::to_string(v + 1) + " has length " +
                                  std::to_string(inputs[v].size()) + ", expected " +
                                  std::to_string(params.input_dims()[v]));
    }
  }

  Vector out(params.out_dim(), 0.0);
  for (const auto& idx : params.terms()) {
    // Contract the highest mode first so lower mode numbers stay valid.
    DenseTensor t = params.tensor(idx);
    for (std::size_t mode = idx.n + 1; mode >= 2; --mode)
      t = mode_vec_product(t, mode, inputs[variable_of_mode(idx, params.variables(), mode)]);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += params.beta()[i];
  return out;
}

double eval_scalar_second_order(const ScalarSecondOrder& w, std::span<const double> z1, std::span<const double> z2) {
  const std::size_t d1 = z1.size();
  const std::size_t d2 = z2.size();
  if (w.w11.size() != d2 || w.w12.size() != d1 || w.w21.rows() != d2 || w.w21.cols() != d2 || w.w23.rows() != d1 ||
      w.w23.cols() != d1 || w.w22.rows() != d1 || w.w22.cols() != d2) {
    throw std::invalid_argument("eval_scalar_second_order: coefficient shapes do not match inputs of length " +
                                std::to_string(d1) + " and " + std::to_string(d2));
  }
  double y = w.beta;
  for (std::size_t l = 0; l < d2; ++l) y += w.w11[l] * z2[l];
  for (std::size_t l = 0; l < d1; ++l) y += w.w12[l] * z1[l];
  for (std::size_t l = 0; l < d2; ++l)
    for (std::size_t m = 0; m < d2; ++m) y += w.w21(l, m) * z2[l] * z2[m];
  for (std::size_t l = 0; l < d1; ++l)
    for (std::size_t m = 0; m < d1; ++m) y += w.w23(l, m) * z1[l] * z1[m];
  for (std::size_t l = 0; l < d1; ++l)
    for (std::size_t m = 0; m < d2; ++m) y += w.w22(l, m) * z1[l] * z2[m];
  return y;
}

OracleParams oracle_from_scalar(std::span<const ScalarSecondOrder> per_output) {
  if (per_output.empty()) throw std::invalid_argument("oracle_from_scalar: no outputs");
  const std::size_t d1 = per_output[0].w12.size();
  const std::size_t d2 = per_output[0].w11.size();
  OracleParams out(2, {d1, d2}, per_output.size());
  for (std::size_t tau = 0; tau < per_output.size(); ++tau) {
    const auto& w = per_output[tau];
    if (w.w12.size() != d1 || w.w11.size() != d2)
      throw std::invalid_argument("oracle_from_scalar: inconsistent coefficient sizes");
    for (std::size_t l = 0; l < d2; ++l) out.tensor({1, 1}).at(std::array{tau, l}) = w.w11[l];
    for (std::size_t l = 0; l < d1; ++l) out.tensor({1, 2}).at(std::array{tau, l}) = w.w12[l];
    for (std::size_t l = 0; l < d2; ++l)
      for (std::size_t m = 0; m < d2; ++m) out.tensor({2, 1}).at(std::array{tau, l, m}) = w.w21(l, m);
    for (std::size_t l = 0; l < d1; ++l)
      for (std::size_t m = 0; m < d1; ++m) out.tensor({2, 3}).at(std::array{tau, l, m}) = w.w23(l, m);
    for (std::size_t l = 0; l < d1; ++l)
      for (std::size_t m = 0; m < d2; ++m) out.tensor({2, 2}).at(std::array{tau, l, m}) = w.w22(l, m);
    out.beta()[tau] = w.beta;
  }
  return out;
}

OracleParams build_order2_coupled_tensors(const CopeParams& f) {
  if (f.variant() != Variant::Ccp) throw std::invalid_argument("build_order2_coupled_tensors: needs CCP factors");
  if (f.order() != 2 || f.variables() != 2)
    throw std::invalid_argument("build_order2_coupled_tensors: needs a second-order, two-variable factorization");
  f.validate();
  if (f.rank() > kOracleMaxDim)
    throw std::invalid_argument("build_order2_coupled_tensors: rank " + std::to_string(f.rank()) + " exceeds " +
                                std::to_string(kOracleMaxDim));

  const std::size_t d1 = f.input_dims()[0];
  const std::size_t d2 = f.input_dims()[1];
  const std::size_t o = f.out_dim();
  OracleParams out(2, {d1, d2}, o);

  const Matrix& C = f.C();
  const Matrix& u1a = f.factor(1, 0);
  const Matrix& u1b = f.factor(1, 1);
  const Matrix& u2a = f.factor(2, 0);
  const Matrix& u2b = f.factor(2, 1);

  // W_(1) = C (U_mode3 (.) U_mode2)^T, folded back along mode 1.
  auto fold = [&](const Matrix& unfolded, const Shape& shape) { return mode_fold(unfolded, 1, shape); };
  out.tensor({1, 1}) = fold(matmul(C, transpose(u1b)), {o, d2});
  out.tensor({1, 2}) = fold(matmul(C, transpose(u1a)), {o, d1});
  out.tensor({2, 1}) = fold(matmul(C, transpose(khatri_rao(u2b, u1b))), {o, d2, d2});
  out.tensor({2, 3}) = fold(matmul(C, transpose(khatri_rao(u2a, u1a))), {o, d1, d1});
  // (U[2,II]^T zII) * (U[1,I]^T zI) + (U[2,I]^T zI) * (U[1,II]^T zII), z_I on mode 2.
  const Matrix cross = add(matmul(C, transpose(khatri_rao(u2b, u1a))), matmul(C, transpose(khatri_rao(u1b, u2a))));
  out.tensor({2, 2}) = fold(cross, {o, d1, d2});

  for (std::size_t i = 0; i < o; ++i) out.beta()[i] = f.beta()(0, i);
  return out;
}

DegreeReport degree_probe_scalar(const std::function<double(double)>& g, std::size_t max_order) {
  if (max_order > 12) throw std::invalid_argument("degree_probe: max_order must be <= 12");
  const std::size_t nodes = max_order + 2;
  std::vector<double> table(nodes);
  for (std::size_t t = 0; t < nodes; ++t) table[t] = g(static_cast<double>(t));

  double scale = 0.0;
  for (double v : table) {
    if (!std::isfinite(v)) throw std::runtime_error("degree_probe: non-finite function value");
    scale = std::max(scale, std::abs(v));
  }
  // differences[j] = forward difference of order j at t = 0
  std::vector<double> differences{table[0]};
  for (std::size_t j = 1; j < nodes; ++j) {
    for (std::size_t t = 0; t + j < nodes; ++t) table[t] = table[t + 1] - table[t];
    differences.push_back(table[0]);
  }
  for (double d : differences) scale = std::max(scale, std::abs(d));

  const double tol = 1e-6 * scale;
  DegreeReport report;
  for (std::size_t j = differences.size(); j-- > 0;) {
    if (std::abs(differences[j]) > tol) {
      report.degree = j;
      break;
    }
  }
  if (report.degree == max_order + 1) {
    report.degree = max_order;
    report.saturated = true;
  }
  return report;
}

DegreeReport degree_probe(const std::function<Vector(std::span<const double>)>& f, std::span<const double> base,
                          std::span<const double> direction, std::size_t max_order) {
  if (base.size() != direction.size()) throw std::invalid_argument("degree_probe: base and direction lengths differ");
  std::vector<double> point(base.size());
  return degree_probe_scalar(
      [&](double t) {
        for (std::size_t i = 0; i < point.size(); ++i) point[i] = base[i] + t * direction[i];
        double s = 0.0;
        for (double v : f(point)) s += v;
        return s;
      },
      max_order);
}

}  // namespace cope
