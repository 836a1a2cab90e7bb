#include "cope/models.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cope {

namespace detail {

std::string roman(std::size_t phi) {
  static const char* names[] = {"I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X"};
  return phi < 10 ? names[phi] : std::to_string(phi + 1);
}

}  // namespace detail

namespace {

// Eager evaluation on matrices.
struct ValueOps {
  using Value = Matrix;

  Matrix param(const Matrix& m) const { return m; }
  Matrix matmul(const Matrix& a, const Matrix& b) const { return cope::matmul(a, b); }
  Matrix matmul_nt(const Matrix& a, const Matrix& b) const { return cope::matmul(a, transpose(b)); }
  Matrix add(const Matrix& a, const Matrix& b) const { return cope::add(a, b); }
  Matrix hadamard(const Matrix& a, const Matrix& b) const { return cope::hadamard(a, b); }
  Matrix add_row(const Matrix& x, const Matrix& r) const {
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += r(0, j);
    return out;
  }
  Matrix mul_row(const Matrix& x, const Matrix& r) const {
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= r(0, j);
    return out;
  }
  Matrix tanh(const Matrix& x) const {
    Matrix out = x;
    for (auto& v : out.values()) v = std::tanh(v);
    return out;
  }
  Matrix center(const Matrix& x) const {
    Matrix out = x;
    for (std::size_t j = 0; j < out.cols(); ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < out.rows(); ++i) mean += out(i, j);
      mean /= static_cast<double>(out.rows());
      for (std::size_t i = 0; i < out.rows(); ++i) out(i, j) -= mean;
    }
    return out;
  }
  Matrix concat_cols(const Matrix& a, const Matrix& b) const {
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
    }
    return out;
  }
};

// Records the same computation on a tape.
struct TapeOps {
  using Value = ad::NodeId;

  ad::Tape& tape;
  const ParameterSet& params;

  ad::NodeId param(const Matrix& m) const {
    if (auto id = params.find(&m)) return tape.parameter(*id, m);
    return tape.constant(m);
  }
  ad::NodeId matmul(ad::NodeId a, ad::NodeId b) const { return tape.matmul(a, b); }
  ad::NodeId matmul_nt(ad::NodeId a, ad::NodeId b) const { return tape.matmul_nt(a, b); }
  ad::NodeId add(ad::NodeId a, ad::NodeId b) const { return tape.add(a, b); }
  ad::NodeId hadamard(ad::NodeId a, ad::NodeId b) const { return tape.hadamard(a, b); }
  ad::NodeId add_row(ad::NodeId x, ad::NodeId r) const { return tape.add_row(x, r); }
  ad::NodeId mul_row(ad::NodeId x, ad::NodeId r) const { return tape.mul_row(x, r); }
  ad::NodeId tanh(ad::NodeId x) const { return tape.tanh(x); }
  ad::NodeId center(ad::NodeId x) const { return tape.center_rows(x); }
  ad::NodeId concat_cols(ad::NodeId a, ad::NodeId b) const { return tape.concat_cols(a, b); }
};

template <class Ops, class Value = typename Ops::Value>
Value embed(Ops& ops, const CopeParams& p, std::size_t n, std::span<const Value> z) {
  Value s = ops.matmul(z[0], ops.param(p.factor(n, 0)));
  for (std::size_t phi = 1; phi < z.size(); ++phi) s = ops.add(s, ops.matmul(z[phi], ops.param(p.factor(n, phi))));
  return s;
}

// B[n]^T b[n] as a 1 x k row.
template <class Ops, class Value = typename Ops::Value>
Value scaling_row(Ops& ops, const CopeParams& p, std::size_t n) {
  return ops.matmul(ops.param(p.b(n)), ops.param(p.B(n)));
}

template <class Ops, class Value = typename Ops::Value>
Value output_head(Ops& ops, const Matrix& C, const Matrix& beta, const Value& y) {
  return ops.add_row(ops.matmul_nt(y, ops.param(C)), ops.param(beta));
}

template <class Ops, class Value = typename Ops::Value>
Value ccp_apply(Ops& ops, const CopeParams& p, std::span<const Value> z) {
  Value y = embed(ops, p, 1, z);
  for (std::size_t n = 2; n <= p.order(); ++n) y = ops.add(y, ops.hadamard(embed(ops, p, n, z), y));
  return output_head(ops, p.C(), p.beta(), y);
}

template <class Ops, class Value = typename Ops::Value>
Value ncp_apply(Ops& ops, const CopeParams& p, std::span<const Value> z) {
  Value y = ops.mul_row(embed(ops, p, 1, z), scaling_row(ops, p, 1));
  for (std::size_t n = 2; n <= p.order(); ++n) {
    Value inner = ops.add_row(ops.matmul(y, ops.param(p.V(n))), scaling_row(ops, p, n));
    y = ops.hadamard(embed(ops, p, n, z), inner);
  }
  return output_head(ops, p.C(), p.beta(), y);
}

template <class Ops, class Value = typename Ops::Value>
Value spade_apply(Ops& ops, const CopeParams& p, std::span<const Value> z) {
  Value y = ops.matmul(z[0], ops.param(p.factor(1, 0)));
  for (std::size_t n = 2; n <= p.order(); ++n) {
    Value inner = ops.add_row(ops.matmul(y, ops.param(p.V(n))), scaling_row(ops, p, n));
    y = ops.hadamard(ops.matmul(z[1], ops.param(p.factor(n, 1))), inner);
  }
  return output_head(ops, p.C(), p.beta(), y);
}

template <class Ops, class Value = typename Ops::Value>
Value additive_apply(Ops& ops, const CopeParams& p, std::span<const Value> z) {
  Value y = ops.add_row(embed(ops, p, 1, z), scaling_row(ops, p, 1));
  for (std::size_t n = 2; n <= p.order(); ++n) {
    Value inner = ops.add_row(ops.matmul(y, ops.param(p.V(n))), scaling_row(ops, p, n));
    y = ops.add(embed(ops, p, n, z), inner);
  }
  return output_head(ops, p.C(), p.beta(), y);
}

template <class Ops, class Value = typename Ops::Value>
Value concat_all(Ops& ops, std::span<const Value> z) {
  Value s = z[0];
  for (std::size_t i = 1; i < z.size(); ++i) s = ops.concat_cols(s, z[i]);
  return s;
}

template <class Ops, class Value = typename Ops::Value>
Value pinet_apply(Ops& ops, const PiNetParams& p, const Value& z) {
  Value y = ops.matmul(z, ops.param(p.lambda[0]));
  for (std::size_t n = 1; n < p.lambda.size(); ++n)
    y = ops.add(ops.hadamard(ops.matmul(z, ops.param(p.lambda[n])), y), y);
  return output_head(ops, p.gamma, p.beta, y);
}

template <class Ops, class Value = typename Ops::Value>
Value block_apply(Ops& ops, const Block& block, std::span<const Value> in) {
  switch (block.kind) {
    case BlockKind::Ccp: return ccp_apply(ops, std::get<CopeParams>(block.params), in);
    case BlockKind::Ncp: return ncp_apply(ops, std::get<CopeParams>(block.params), in);
    case BlockKind::Spade: return spade_apply(ops, std::get<CopeParams>(block.params), in);
    case BlockKind::Additive: return additive_apply(ops, std::get<CopeParams>(block.params), in);
    case BlockKind::PiNet: return pinet_apply(ops, std::get<PiNetParams>(block.params), concat_all(ops, in));
    case BlockKind::ConcatLinear:
      return ops.matmul(concat_all(ops, in), ops.param(std::get<ConcatParams>(block.params).P));
  }
  throw std::logic_error("unknown block kind");
}

template <class Ops, class Value = typename Ops::Value>
Value compose_apply(Ops& ops, const ModelSpec& spec, std::span<const Value> vars) {
  std::optional<Value> prev;
  for (std::size_t i = 0; i < spec.chain.size(); ++i) {
    const Block& block = spec.chain[i];
    std::vector<Value> in;
    if (block.inputs.previous) {
      in.push_back(spec.centering == Centering::BatchMean ? ops.center(*prev) : *prev);
    }
    for (std::size_t v : block.inputs.variables) in.push_back(vars[v]);
    prev = block_apply(ops, block, std::span<const Value>(in));
  }
  if (spec.output_activation == Activation::Tanh) return ops.tanh(*prev);
  return *prev;
}

std::vector<Matrix> as_rows(std::span<const Vector> inputs) {
  std::vector<Matrix> rows;
  rows.reserve(inputs.size());
  for (const auto& v : inputs) rows.push_back(Matrix::row_vector(v));
  return rows;
}

Vector first_row(const Matrix& m) { return Vector(m.row(0).begin(), m.row(0).end()); }

void check_inputs(const std::vector<std::size_t>& dims, std::span<const Vector> inputs, const char* op) {
  if (inputs.size() != dims.size()) {
    throw std::invalid_argument(std::string(op) + ": expected " + std::to_string(dims.size()) + " inputs, got " +
                                std::to_string(inputs.size()));
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != dims[i]) {
      throw std::invalid_argument(std::string(op) + ": input " + detail::roman(i) + " has length " +
                                  std::to_string(inputs[i].size()) + ", expected " + std::to_string(dims[i]));
    }
  }
}

void require_variant(const CopeParams& p, Variant v, const char* op) {
  if (p.variant() != v) {
    throw std::invalid_argument(std::string(op) + ": parameters are " + (p.variant() == Variant::Ccp ? "CCP" : "NCP") +
                                "-shaped");
  }
}

Matrix uniform_matrix(std::size_t r, std::size_t c, double s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-s, s);
  Matrix m(r, c);
  for (auto& v : m.values()) v = dist(rng);
  return m;
}

}  // namespace

// -- CopeParams -------------------------------------------------------------

CopeParams::CopeParams(Variant variant, std::size_t order, std::vector<std::size_t> input_dims, std::size_t rank,
                       std::size_t out_dim, std::size_t omega, bool share_conditional)
    : variant_(variant),
      order_(order),
      input_dims_(std::move(input_dims)),
      rank_(rank),
      out_dim_(out_dim),
      omega_(omega == 0 ? rank : omega),
      share_conditional_(share_conditional) {
  if (order_ == 0) throw std::invalid_argument("CopeParams: order must be >= 1");
  if (rank_ == 0) throw std::invalid_argument("CopeParams: rank must be >= 1");
  if (out_dim_ == 0) throw std::invalid_argument("CopeParams: output dimension must be >= 1");
  if (input_dims_.empty()) throw std::invalid_argument("CopeParams: at least one input variable required");
  for (std::size_t i = 0; i < input_dims_.size(); ++i)
    if (input_dims_[i] == 0)
      throw std::invalid_argument("CopeParams: input " + detail::roman(i) + " has dimension 0");

  factors_.resize(order_);
  for (std::size_t n = 1; n <= order_; ++n) {
    factors_[n - 1].resize(input_dims_.size());
    for (std::size_t phi = 0; phi < input_dims_.size(); ++phi)
      if (!is_shared(n, phi)) factors_[n - 1][phi] = Matrix(input_dims_[phi], rank_);
  }
  if (variant_ == Variant::Ncp) {
    for (std::size_t n = 1; n <= order_; ++n) {
      V_.push_back(n >= 2 ? Matrix(rank_, rank_) : Matrix());
      B_.emplace_back(omega_, rank_);
      b_.emplace_back(1, omega_);
    }
  }
  C_ = Matrix(out_dim_, rank_);
  beta_ = Matrix(1, out_dim_);
}

std::size_t CopeParams::check_order(std::size_t n, const char* what) const {
  if (n < 1 || n > order_) {
    throw std::out_of_range(std::string(what) + ": order " + std::to_string(n) + " outside [1, " +
                            std::to_string(order_) + "]");
  }
  return n - 1;
}

Matrix& CopeParams::factor(std::size_t n, std::size_t phi) {
  return const_cast<Matrix&>(std::as_const(*this).factor(n, phi));
}

const Matrix& CopeParams::factor(std::size_t n, std::size_t phi) const {
  const std::size_t i = check_order(n, "factor");
  if (phi >= input_dims_.size()) throw std::out_of_range("factor: variable " + std::to_string(phi) + " out of range");
  return is_shared(n, phi) ? factors_[0][phi] : factors_[i][phi];
}

Matrix& CopeParams::V(std::size_t n) { return const_cast<Matrix&>(std::as_const(*this).V(n)); }
const Matrix& CopeParams::V(std::size_t n) const {
  if (variant_ != Variant::Ncp) throw std::logic_error("V: CCP parameters have no recursion matrices");
  const std::size_t i = check_order(n, "V");
  if (n < 2) throw std::out_of_range("V: defined for orders >= 2");
  return V_[i];
}

Matrix& CopeParams::B(std::size_t n) { return const_cast<Matrix&>(std::as_const(*this).B(n)); }
const Matrix& CopeParams::B(std::size_t n) const {
  if (variant_ != Variant::Ncp) throw std::logic_error("B: CCP parameters have no scaling factors");
  return B_[check_order(n, "B")];
}

Matrix& CopeParams::b(std::size_t n) { return const_cast<Matrix&>(std::as_const(*this).b(n)); }
const Matrix& CopeParams::b(std::size_t n) const {
  if (variant_ != Variant::Ncp) throw std::logic_error("b: CCP parameters have no scaling vectors");
  return b_[check_order(n, "b")];
}

std::size_t CopeParams::parameter_count() const {
  std::size_t total = 0;
  for_each_parameter([&](const std::string&, const Matrix& m) { total += m.size(); });
  return total;
}

void CopeParams::validate() const {
  auto expect = [](const Matrix& m, std::size_t r, std::size_t c, const std::string& name) {
    if (m.rows() != r || m.cols() != c) {
      throw std::invalid_argument("CopeParams: " + name + " is " + m.shape_string() + ", expected (" +
                                  std::to_string(r) + "x" + std::to_string(c) + ")");
    }
  };
  for (std::size_t n = 1; n <= order_; ++n)
    for (std::size_t phi = 0; phi < input_dims_.size(); ++phi) {
      if (is_shared(n, phi) && !factors_[n - 1][phi].empty())
        throw std::invalid_argument("CopeParams: shared factor slot holds its own matrix");
      expect(factor(n, phi), input_dims_[phi], rank_, "factor[" + std::to_string(n) + "," + detail::roman(phi) + "]");
    }
  if (variant_ == Variant::Ncp) {
    for (std::size_t n = 1; n <= order_; ++n) {
      if (n >= 2) expect(V(n), rank_, rank_, "V[" + std::to_string(n) + "]");
      expect(B(n), omega_, rank_, "B[" + std::to_string(n) + "]");
      expect(b(n), 1, omega_, "b[" + std::to_string(n) + "]");
    }
  }
  expect(C_, out_dim_, rank_, "C");
  expect(beta_, 1, out_dim_, "beta");
}

// -- PiNetParams ------------------------------------------------------------

PiNetParams::PiNetParams(std::size_t order, std::size_t in_dim, std::size_t rank, std::size_t out_dim)
    : gamma(out_dim, rank), beta(1, out_dim) {
  if (order == 0 || in_dim == 0 || rank == 0 || out_dim == 0)
    throw std::invalid_argument("PiNetParams: order, input dim, rank and output dim must be positive");
  lambda.assign(order, Matrix(in_dim, rank));
}

void PiNetParams::validate() const {
  if (lambda.empty()) throw std::invalid_argument("PiNetParams: no orders");
  for (const auto& l : lambda)
    if (l.rows() != in_dim() || l.cols() != rank())
      throw std::invalid_argument("PiNetParams: Lambda factor is " + l.shape_string());
  if (beta.rows() != 1 || beta.cols() != out_dim()) throw std::invalid_argument("PiNetParams: beta is " + beta.shape_string());
}

// -- single-sample forwards -------------------------------------------------

Vector ccp_forward(const CopeParams& p, std::span<const Vector> inputs) {
  require_variant(p, Variant::Ccp, "ccp_forward");
  check_inputs(p.input_dims(), inputs, "ccp_forward");
  ValueOps ops;
  const auto z = as_rows(inputs);
  return first_row(ccp_apply(ops, p, std::span<const Matrix>(z)));
}

Vector ncp_forward(const CopeParams& p, std::span<const Vector> inputs) {
  require_variant(p, Variant::Ncp, "ncp_forward");
  check_inputs(p.input_dims(), inputs, "ncp_forward");
  ValueOps ops;
  const auto z = as_rows(inputs);
  return first_row(ncp_apply(ops, p, std::span<const Matrix>(z)));
}

Vector spade_forward(const CopeParams& p, std::span<const Vector> inputs) {
  require_variant(p, Variant::Ncp, "spade_forward");
  if (p.variables() != 2) throw std::invalid_argument("spade_forward: needs exactly two variables");
  check_inputs(p.input_dims(), inputs, "spade_forward");
  ValueOps ops;
  const auto z = as_rows(inputs);
  return first_row(spade_apply(ops, p, std::span<const Matrix>(z)));
}

Vector additive_forward(const CopeParams& p, std::span<const Vector> inputs) {
  require_variant(p, Variant::Ncp, "additive_forward");
  check_inputs(p.input_dims(), inputs, "additive_forward");
  ValueOps ops;
  const auto z = as_rows(inputs);
  return first_row(additive_apply(ops, p, std::span<const Matrix>(z)));
}

Vector pinet_forward(const PiNetParams& p, std::span<const double> z) {
  if (z.size() != p.in_dim()) {
    throw std::invalid_argument("pinet_forward: input has length " + std::to_string(z.size()) + ", expected " +
                                std::to_string(p.in_dim()));
  }
  ValueOps ops;
  return first_row(pinet_apply(ops, p, Matrix::row_vector(z)));
}

Vector concat_linear_forward(const Matrix& P, std::span<const Vector> inputs) {
  std::size_t total = 0;
  for (const auto& v : inputs) total += v.size();
  if (inputs.empty() || total != P.rows()) {
    throw std::invalid_argument("concat_linear_forward: concatenated length " + std::to_string(total) +
                                " but P has " + std::to_string(P.rows()) + " rows");
  }
  ValueOps ops;
  const auto z = as_rows(inputs);
  return first_row(ops.matmul(concat_all(ops, std::span<const Matrix>(z)), P));
}

// -- blocks and chains --------------------------------------------------------

std::string to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Ccp: return "ccp";
    case BlockKind::Ncp: return "ncp";
    case BlockKind::Spade: return "spade";
    case BlockKind::Additive: return "additive";
    case BlockKind::PiNet: return "pinet";
    case BlockKind::ConcatLinear: return "concat_linear";
  }
  return "unknown";
}

BlockKind block_kind_from_string(const std::string& name) {
  for (auto k : {BlockKind::Ccp, BlockKind::Ncp, BlockKind::Spade, BlockKind::Additive, BlockKind::PiNet,
                 BlockKind::ConcatLinear})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown block kind '" + name + "'");
}

std::size_t Block::out_dim() const {
  return std::visit(
      [](const auto& p) -> std::size_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CopeParams>) return p.out_dim();
        else if constexpr (std::is_same_v<T, PiNetParams>) return p.out_dim();
        else return p.P.cols();
      },
      params);
}

std::size_t ModelSpec::output_dim() const {
  if (chain.empty()) throw std::invalid_argument("ModelSpec: empty chain");
  return chain.back().out_dim();
}

void ModelSpec::validate() const {
  if (chain.empty()) throw std::invalid_argument("ModelSpec: chain must contain at least one block");
  for (std::size_t v = 0; v < variable_dims.size(); ++v)
    if (variable_dims[v] == 0) throw std::invalid_argument("ModelSpec: variable " + detail::roman(v) + " has dimension 0");

  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Block& block = chain[i];
    const std::string where = "ModelSpec: block " + std::to_string(i) + " (" + to_string(block.kind) + ")";
    if (i == 0 && block.inputs.previous) throw std::invalid_argument(where + " cannot consume a previous output");
    std::vector<std::size_t> dims;
    if (block.inputs.previous) dims.push_back(chain[i - 1].out_dim());
    for (std::size_t v : block.inputs.variables) {
      if (v >= variable_dims.size())
        throw std::invalid_argument(where + " consumes unknown variable " + std::to_string(v));
      dims.push_back(variable_dims[v]);
    }
    if (dims.empty()) throw std::invalid_argument(where + " has no inputs");
    const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{0});

    switch (block.kind) {
      case BlockKind::Ccp:
      case BlockKind::Ncp:
      case BlockKind::Spade:
      case BlockKind::Additive: {
        const auto* p = std::get_if<CopeParams>(&block.params);
        if (!p) throw std::invalid_argument(where + " needs CopeParams");
        p->validate();
        const Variant want = block.kind == BlockKind::Ccp ? Variant::Ccp : Variant::Ncp;
        if (p->variant() != want) throw std::invalid_argument(where + " has parameters of the wrong variant");
        if (block.kind == BlockKind::Spade && dims.size() != 2)
          throw std::invalid_argument(where + " needs exactly two inputs");
        if (p->input_dims() != dims) throw std::invalid_argument(where + " input dimensions do not chain");
        break;
      }
      case BlockKind::PiNet: {
        const auto* p = std::get_if<PiNetParams>(&block.params);
        if (!p) throw std::invalid_argument(where + " needs PiNetParams");
        p->validate();
        if (p->in_dim() != total)
          throw std::invalid_argument(where + " expects input length " + std::to_string(p->in_dim()) + ", gets " +
                                      std::to_string(total));
        break;
      }
      case BlockKind::ConcatLinear: {
        const auto* p = std::get_if<ConcatParams>(&block.params);
        if (!p) throw std::invalid_argument(where + " needs ConcatParams");
        if (p->P.rows() != total)
          throw std::invalid_argument(where + " expects input length " + std::to_string(p->P.rows()) + ", gets " +
                                      std::to_string(total));
        break;
      }
    }
  }
}

std::size_t ModelSpec::parameter_count() const {
  std::size_t total = 0;
  for_each_parameter([&](const std::string&, const Matrix& m) { total += m.size(); });
  return total;
}

Matrix product_compose(const ModelSpec& spec, std::span<const Matrix> variables) {
  spec.validate();
  if (variables.size() != spec.variable_dims.size()) {
    throw std::invalid_argument("product_compose: expected " + std::to_string(spec.variable_dims.size()) +
                                " variables, got " + std::to_string(variables.size()));
  }
  for (std::size_t v = 0; v < variables.size(); ++v) {
    if (variables[v].cols() != spec.variable_dims[v] || variables[v].rows() != variables[0].rows()) {
      throw std::invalid_argument("product_compose: variable " + detail::roman(v) + " batch is " +
                                  variables[v].shape_string());
    }
  }
  ValueOps ops;
  return compose_apply(ops, spec, variables);
}

Vector product_compose(const ModelSpec& spec, std::span<const Vector> variables) {
  if (spec.centering == Centering::BatchMean && spec.chain.size() > 1) {
    throw std::invalid_argument("product_compose: batch-mean centering is undefined for a single sample");
  }
  const auto rows = as_rows(variables);
  return first_row(product_compose(spec, std::span<const Matrix>(rows)));
}

ad::NodeId block_forward(ad::Tape& tape, const ParameterSet& params, const Block& block,
                         std::span<const ad::NodeId> inputs) {
  TapeOps ops{tape, params};
  return block_apply(ops, block, inputs);
}

ad::NodeId product_compose(ad::Tape& tape, const ParameterSet& params, const ModelSpec& spec,
                           std::span<const ad::NodeId> variables) {
  spec.validate();
  if (variables.size() != spec.variable_dims.size()) {
    throw std::invalid_argument("product_compose: expected " + std::to_string(spec.variable_dims.size()) +
                                " variables, got " + std::to_string(variables.size()));
  }
  TapeOps ops{tape, params};
  return compose_apply(ops, spec, variables);
}

// -- ParameterSet -------------------------------------------------------------

ParameterSet::ParameterSet(ModelSpec& spec) {
  spec.for_each_parameter([&](const std::string& name, Matrix& m) { add(name, m); });
}

ParameterSet::ParameterSet(CopeParams& params) {
  params.for_each_parameter([&](const std::string& name, Matrix& m) { add(name, m); });
}

ParameterSet::ParameterSet(PiNetParams& params) {
  for (std::size_t n = 0; n < params.lambda.size(); ++n) add("Lambda[" + std::to_string(n + 1) + "]", params.lambda[n]);
  add("Gamma", params.gamma);
  add("beta", params.beta);
}

void ParameterSet::add(const std::string& name, Matrix& m) {
  ids_.emplace(&m, params_.size());
  params_.push_back(&m);
  names_.push_back(name);
}

std::optional<ad::ParamId> ParameterSet::find(const Matrix* m) const {
  auto it = ids_.find(m);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

// -- initialization -----------------------------------------------------------

void initialize(CopeParams& p, std::mt19937_64& rng, const InitOptions& opt) {
  const double s = opt.scale > 0 ? opt.scale : 1.0 / std::sqrt(static_cast<double>(p.rank()));
  p.for_each_parameter([&](const std::string& name, Matrix& m) {
    if (name == "beta") {
      m = opt.random_bias ? uniform_matrix(m.rows(), m.cols(), s, rng) : Matrix(m.rows(), m.cols());
    } else if (name.starts_with("b[") && opt.ones_for_scaling) {
      m = Matrix(m.rows(), m.cols(), 1.0);
    } else {
      m = uniform_matrix(m.rows(), m.cols(), s, rng);
    }
  });
}

void initialize(PiNetParams& p, std::mt19937_64& rng, const InitOptions& opt) {
  const double s = opt.scale > 0 ? opt.scale : 1.0 / std::sqrt(static_cast<double>(p.rank()));
  for (auto& l : p.lambda) l = uniform_matrix(l.rows(), l.cols(), s, rng);
  p.gamma = uniform_matrix(p.gamma.rows(), p.gamma.cols(), s, rng);
  p.beta = opt.random_bias ? uniform_matrix(1, p.beta.cols(), s, rng) : Matrix(1, p.beta.cols());
}

void initialize(ModelSpec& spec, std::mt19937_64& rng, const InitOptions& opt) {
  for (auto& block : spec.chain) {
    std::visit(
        [&](auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ConcatParams>) {
            const double s = opt.scale > 0 ? opt.scale : 1.0 / std::sqrt(static_cast<double>(p.P.rows()));
            p.P = uniform_matrix(p.P.rows(), p.P.cols(), s, rng);
          } else {
            initialize(p, rng, opt);
          }
        },
        block.params);
  }
}

ModelSpec single_block_model(Block block, std::vector<std::size_t> variable_dims) {
  ModelSpec spec;
  spec.variable_dims = std::move(variable_dims);
  block.inputs.previous = false;
  block.inputs.variables.resize(spec.variable_dims.size());
  std::iota(block.inputs.variables.begin(), block.inputs.variables.end(), std::size_t{0});
  spec.chain.push_back(std::move(block));
  spec.validate();
  return spec;
}

}  // namespace cope
