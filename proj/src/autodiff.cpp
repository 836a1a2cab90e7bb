#include "cope/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cope::ad {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, std::string_view op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                                b.shape_string());
  }
}

void require_row(const Matrix& x, const Matrix& r, std::string_view op) {
  if (r.rows() != 1 || r.cols() != x.cols()) {
    throw std::invalid_argument(std::string(op) + ": expected 1x" + std::to_string(x.cols()) +
                                " row, got " + r.shape_string());
  }
}

Matrix matmul_nt_values(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul_nt: " + a.shape_string() + " * " + b.shape_string() + "^T");
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto br = b.row(j);
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += ar[p] * br[p];
      c(i, j) = s;
    }
  }
  return c;
}

// a^T * b
Matrix matmul_tn_values(const Matrix& a, const Matrix& b) {
  Matrix c(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    const auto ar = a.row(p);
    const auto br = b.row(p);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double v = ar[i];
      auto cr = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += v * br[j];
    }
  }
  return c;
}

template <class F>
Matrix map_values(const Matrix& x, F f) {
  Matrix out = x;
  for (auto& v : out.values()) v = f(v);
  return out;
}

double softplus_value(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double mmd_value(const Matrix& x, const Matrix& y, std::span<const double> bandwidths) {
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(y.rows());
  double total = 0.0;
  for (double sigma : bandwidths) {
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double kxx = 0.0, kyy = 0.0, kxy = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.rows(); ++j) kxx += std::exp(-sq_dist(x.row(i), x.row(j)) * inv);
    for (std::size_t i = 0; i < y.rows(); ++i)
      for (std::size_t j = 0; j < y.rows(); ++j) kyy += std::exp(-sq_dist(y.row(i), y.row(j)) * inv);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < y.rows(); ++j) kxy += std::exp(-sq_dist(x.row(i), y.row(j)) * inv);
    total += kxx / (n * n) + kyy / (m * m) - 2.0 * kxy / (n * m);
  }
  return total;
}

// d MMD / d x scaled by g.
Matrix mmd_grad(const Matrix& x, const Matrix& y, std::span<const double> bandwidths, double g) {
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(y.rows());
  Matrix grad(x.rows(), x.cols());
  for (double sigma : bandwidths) {
    const double inv = 1.0 / (2.0 * sigma * sigma);
    const double inv_s2 = 1.0 / (sigma * sigma);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto gi = grad.row(i);
      const auto xi = x.row(i);
      for (std::size_t j = 0; j < x.rows(); ++j) {
        const auto xj = x.row(j);
        const double k = std::exp(-sq_dist(xi, xj) * inv);
        // both (i, j) and (j, i) terms of the double sum
        const double c = g * 2.0 / (n * n) * (-k * inv_s2);
        for (std::size_t p = 0; p < x.cols(); ++p) gi[p] += c * (xi[p] - xj[p]);
      }
      for (std::size_t j = 0; j < y.rows(); ++j) {
        const auto yj = y.row(j);
        const double k = std::exp(-sq_dist(xi, yj) * inv);
        const double c = -g * 2.0 / (n * m) * (-k * inv_s2);
        for (std::size_t p = 0; p < x.cols(); ++p) gi[p] += c * (xi[p] - yj[p]);
      }
    }
  }
  return grad;
}

void accumulate(Matrix& target, const Matrix& g) {
  auto tv = target.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < tv.size(); ++i) tv[i] += gv[i];
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Constant: return "constant";
    case Op::Parameter: return "parameter";
    case Op::MatMul: return "matmul";
    case Op::MatMulNT: return "matmul_nt";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Hadamard: return "hadamard";
    case Op::AddRow: return "add_row";
    case Op::MulRow: return "mul_row";
    case Op::Scale: return "scale";
    case Op::Tanh: return "tanh";
    case Op::LeakyRelu: return "leaky_relu";
    case Op::Softplus: return "softplus";
    case Op::Abs: return "abs";
    case Op::ClampMax: return "clamp_max";
    case Op::CenterRows: return "center_rows";
    case Op::Rows: return "rows";
    case Op::ConcatCols: return "concat_cols";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::MeanSquaredError: return "mse";
    case Op::MmdRbf: return "mmd_rbf";
    case Op::ForwardOnly: return "forward_only";
  }
  return "unknown";
}

const Matrix& GradientMap::at(ParamId id) const {
  auto it = grads_.find(id);
  if (it == grads_.end()) throw std::out_of_range("GradientMap: no gradient for parameter " + std::to_string(id));
  return it->second;
}

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id >= nodes_.size()) throw std::out_of_range("Tape: unknown node " + std::to_string(id));
  return nodes_[id];
}

const Matrix& Tape::value(NodeId id) const { return node(id).value; }

double Tape::scalar(NodeId id) const {
  const Matrix& v = value(id);
  if (v.size() != 1) throw std::invalid_argument("Tape::scalar: node value is " + v.shape_string());
  return v(0, 0);
}

NodeId Tape::constant(Matrix value) { return push({.op = Op::Constant, .value = std::move(value)}); }

NodeId Tape::parameter(ParamId id, const Matrix& value) {
  if (auto it = param_nodes_.find(id); it != param_nodes_.end()) {
    const Matrix& existing = nodes_[it->second].value;
    if (existing.rows() != value.rows() || existing.cols() != value.cols()) {
      throw std::invalid_argument("Tape::parameter: parameter " + std::to_string(id) +
                                  " re-registered with a different shape");
    }
    return it->second;
  }
  const NodeId n = push({.op = Op::Parameter, .value = value, .param = id});
  param_nodes_.emplace(id, n);
  return n;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  return push({.op = Op::MatMul, .inputs = {a, b}, .value = cope::matmul(value(a), value(b))});
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  return push({.op = Op::MatMulNT, .inputs = {a, b}, .value = matmul_nt_values(value(a), value(b))});
}

NodeId Tape::add(NodeId a, NodeId b) {
  return push({.op = Op::Add, .inputs = {a, b}, .value = cope::add(value(a), value(b))});
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "sub");
  Matrix v = value(a);
  auto vv = v.values();
  auto bv = value(b).values();
  for (std::size_t i = 0; i < vv.size(); ++i) vv[i] -= bv[i];
  return push({.op = Op::Sub, .inputs = {a, b}, .value = std::move(v)});
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  return push({.op = Op::Hadamard, .inputs = {a, b}, .value = cope::hadamard(value(a), value(b))});
}

NodeId Tape::add_row(NodeId x, NodeId row) {
  const Matrix& xv = value(x);
  const Matrix& r = value(row);
  require_row(xv, r, "add_row");
  Matrix v = xv;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto vr = v.row(i);
    for (std::size_t j = 0; j < v.cols(); ++j) vr[j] += r(0, j);
  }
  return push({.op = Op::AddRow, .inputs = {x, row}, .value = std::move(v)});
}

NodeId Tape::mul_row(NodeId x, NodeId row) {
  const Matrix& xv = value(x);
  const Matrix& r = value(row);
  require_row(xv, r, "mul_row");
  Matrix v = xv;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto vr = v.row(i);
    for (std::size_t j = 0; j < v.cols(); ++j) vr[j] *= r(0, j);
  }
  return push({.op = Op::MulRow, .inputs = {x, row}, .value = std::move(v)});
}

NodeId Tape::scale(NodeId x, double s) {
  return push({.op = Op::Scale, .inputs = {x}, .value = cope::scale(value(x), s), .scalar = s});
}

NodeId Tape::tanh(NodeId x) {
  return push({.op = Op::Tanh, .inputs = {x}, .value = map_values(value(x), [](double v) { return std::tanh(v); })});
}

NodeId Tape::leaky_relu(NodeId x, double slope) {
  return push({.op = Op::LeakyRelu,
               .inputs = {x},
               .value = map_values(value(x), [slope](double v) { return v > 0 ? v : slope * v; }),
               .scalar = slope});
}

NodeId Tape::softplus(NodeId x) {
  return push({.op = Op::Softplus, .inputs = {x}, .value = map_values(value(x), softplus_value)});
}

NodeId Tape::abs(NodeId x) {
  return push({.op = Op::Abs, .inputs = {x}, .value = map_values(value(x), [](double v) { return std::abs(v); })});
}

NodeId Tape::clamp_max(NodeId x, double limit) {
  return push({.op = Op::ClampMax,
               .inputs = {x},
               .value = map_values(value(x), [limit](double v) { return std::min(v, limit); }),
               .scalar = limit});
}

NodeId Tape::center_rows(NodeId x) {
  Matrix v = value(x);
  if (v.rows() == 0) throw std::invalid_argument("center_rows: empty batch");
  for (std::size_t j = 0; j < v.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < v.rows(); ++i) mean += v(i, j);
    mean /= static_cast<double>(v.rows());
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) -= mean;
  }
  return push({.op = Op::CenterRows, .inputs = {x}, .value = std::move(v)});
}

NodeId Tape::rows(NodeId x, std::size_t begin, std::size_t end) {
  const Matrix& xv = value(x);
  if (begin > end || end > xv.rows()) {
    throw std::invalid_argument("rows: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                                ") outside " + xv.shape_string());
  }
  Matrix v(end - begin, xv.cols());
  for (std::size_t i = begin; i < end; ++i)
    std::copy(xv.row(i).begin(), xv.row(i).end(), v.row(i - begin).begin());
  return push({.op = Op::Rows, .inputs = {x}, .value = std::move(v), .offset = begin});
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.rows() != bv.rows()) {
    throw std::invalid_argument("concat_cols: row counts " + av.shape_string() + " vs " + bv.shape_string());
  }
  Matrix v(av.rows(), av.cols() + bv.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    std::copy(av.row(i).begin(), av.row(i).end(), v.row(i).begin());
    std::copy(bv.row(i).begin(), bv.row(i).end(), v.row(i).begin() + static_cast<std::ptrdiff_t>(av.cols()));
  }
  return push({.op = Op::ConcatCols, .inputs = {a, b}, .value = std::move(v)});
}

NodeId Tape::sum(NodeId x) {
  double s = 0.0;
  for (double v : value(x).values()) s += v;
  return push({.op = Op::Sum, .inputs = {x}, .value = Matrix(1, 1, s)});
}

NodeId Tape::mean(NodeId x) {
  const Matrix& xv = value(x);
  if (xv.size() == 0) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double v : xv.values()) s += v;
  return push({.op = Op::Mean, .inputs = {x}, .value = Matrix(1, 1, s / static_cast<double>(xv.size()))});
}

NodeId Tape::mse(NodeId pred, const Matrix& target) {
  const Matrix& p = value(pred);
  require_same_shape(p, target, "mse");
  if (p.size() == 0) throw std::invalid_argument("mse: empty batch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p.values()[i] - target.values()[i];
    s += d * d;
  }
  return push({.op = Op::MeanSquaredError,
               .inputs = {pred},
               .value = Matrix(1, 1, s / static_cast<double>(p.size())),
               .aux = target});
}

NodeId Tape::mmd_rbf(NodeId x, const Matrix& y, std::span<const double> bandwidths) {
  const Matrix& xv = value(x);
  if (xv.rows() == 0 || y.rows() == 0) throw std::invalid_argument("mmd_rbf: empty batch");
  if (xv.cols() != y.cols()) {
    throw std::invalid_argument("mmd_rbf: feature dims " + std::to_string(xv.cols()) + " and " +
                                std::to_string(y.cols()));
  }
  for (double s : bandwidths)
    if (!(s > 0)) throw std::invalid_argument("mmd_rbf: bandwidths must be positive");
  return push({.op = Op::MmdRbf,
               .inputs = {x},
               .value = Matrix(1, 1, mmd_value(xv, y, bandwidths)),
               .aux = y,
               .bandwidths = {bandwidths.begin(), bandwidths.end()}});
}

NodeId Tape::forward_only(std::string name, std::vector<NodeId> inputs, Matrix value) {
  for (NodeId in : inputs) node(in);
  return push({.op = Op::ForwardOnly, .inputs = std::move(inputs), .value = std::move(value), .name = std::move(name)});
}

GradientMap Tape::backward(NodeId output) const {
  if (value(output).size() != 1) {
    throw std::invalid_argument("backward: implicit seed needs a 1x1 output, got " + value(output).shape_string());
  }
  return backward(output, Matrix(1, 1, 1.0));
}

GradientMap Tape::backward(NodeId output, const Matrix& seed) const {
  require_same_shape(value(output), seed, "backward seed");
  std::vector<Matrix> grads(output + 1);
  std::vector<bool> reached(output + 1, false);
  grads[output] = seed;
  reached[output] = true;

  auto send = [&](NodeId to, const Matrix& g) {
    if (!reached[to]) {
      grads[to] = g;
      reached[to] = true;
    } else {
      accumulate(grads[to], g);
    }
  };

  GradientMap result;
  for (NodeId id = output + 1; id-- > 0;) {
    if (!reached[id]) continue;
    const Node& n = nodes_[id];
    const Matrix& g = grads[id];
    switch (n.op) {
      case Op::Constant: break;
      case Op::Parameter: {
        Matrix& slot = result[n.param];
        if (slot.size() == 0) slot = g;
        else accumulate(slot, g);
        break;
      }
      case Op::MatMul: {
        // C = A B: dA = G B^T, dB = A^T G
        send(n.inputs[0], matmul_nt_values(g, value(n.inputs[1])));
        send(n.inputs[1], matmul_tn_values(value(n.inputs[0]), g));
        break;
      }
      case Op::MatMulNT: {
        // C = A B^T: dA = G B, dB = G^T A
        send(n.inputs[0], cope::matmul(g, value(n.inputs[1])));
        send(n.inputs[1], matmul_tn_values(g, value(n.inputs[0])));
        break;
      }
      case Op::Add:
        send(n.inputs[0], g);
        send(n.inputs[1], g);
        break;
      case Op::Sub:
        send(n.inputs[0], g);
        send(n.inputs[1], cope::scale(g, -1.0));
        break;
      case Op::Hadamard:
        send(n.inputs[0], cope::hadamard(g, value(n.inputs[1])));
        send(n.inputs[1], cope::hadamard(g, value(n.inputs[0])));
        break;
      case Op::AddRow: {
        Matrix gr(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
        send(n.inputs[0], g);
        send(n.inputs[1], gr);
        break;
      }
      case Op::MulRow: {
        const Matrix& x = value(n.inputs[0]);
        const Matrix& r = value(n.inputs[1]);
        Matrix gx = g;
        Matrix gr(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) {
            gx(i, j) *= r(0, j);
            gr(0, j) += g(i, j) * x(i, j);
          }
        send(n.inputs[0], gx);
        send(n.inputs[1], gr);
        break;
      }
      case Op::Scale: send(n.inputs[0], cope::scale(g, n.scalar)); break;
      case Op::Tanh: {
        Matrix gx = g;
        auto gv = gx.values();
        auto yv = n.value.values();
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= 1.0 - yv[i] * yv[i];
        send(n.inputs[0], gx);
        break;
      }
      case Op::LeakyRelu: {
        Matrix gx = g;
        auto gv = gx.values();
        auto xv = value(n.inputs[0]).values();
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= xv[i] > 0 ? 1.0 : n.scalar;
        send(n.inputs[0], gx);
        break;
      }
      case Op::Softplus: {
        Matrix gx = g;
        auto gv = gx.values();
        auto xv = value(n.inputs[0]).values();
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= sigmoid_value(xv[i]);
        send(n.inputs[0], gx);
        break;
      }
      case Op::Abs: {
        Matrix gx = g;
        auto gv = gx.values();
        auto xv = value(n.inputs[0]).values();
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= xv[i] > 0 ? 1.0 : (xv[i] < 0 ? -1.0 : 0.0);
        send(n.inputs[0], gx);
        break;
      }
      case Op::ClampMax: {
        Matrix gx = g;
        auto gv = gx.values();
        auto xv = value(n.inputs[0]).values();
        for (std::size_t i = 0; i < gv.size(); ++i)
          if (!(xv[i] < n.scalar)) gv[i] = 0.0;
        send(n.inputs[0], gx);
        break;
      }
      case Op::CenterRows: {
        Matrix gx = g;
        for (std::size_t j = 0; j < gx.cols(); ++j) {
          double mean = 0.0;
          for (std::size_t i = 0; i < gx.rows(); ++i) mean += gx(i, j);
          mean /= static_cast<double>(gx.rows());
          for (std::size_t i = 0; i < gx.rows(); ++i) gx(i, j) -= mean;
        }
        send(n.inputs[0], gx);
        break;
      }
      case Op::Rows: {
        const Matrix& x = value(n.inputs[0]);
        Matrix gx(x.rows(), x.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
          std::copy(g.row(i).begin(), g.row(i).end(), gx.row(i + n.offset).begin());
        send(n.inputs[0], gx);
        break;
      }
      case Op::ConcatCols: {
        const std::size_t ca = value(n.inputs[0]).cols();
        const std::size_t cb = value(n.inputs[1]).cols();
        Matrix ga(g.rows(), ca), gb(g.rows(), cb);
        for (std::size_t i = 0; i < g.rows(); ++i) {
          for (std::size_t j = 0; j < ca; ++j) ga(i, j) = g(i, j);
          for (std::size_t j = 0; j < cb; ++j) gb(i, j) = g(i, ca + j);
        }
        send(n.inputs[0], ga);
        send(n.inputs[1], gb);
        break;
      }
      case Op::Sum: {
        const Matrix& x = value(n.inputs[0]);
        send(n.inputs[0], Matrix(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::Mean: {
        const Matrix& x = value(n.inputs[0]);
        send(n.inputs[0], Matrix(x.rows(), x.cols(), g(0, 0) / static_cast<double>(x.size())));
        break;
      }
      case Op::MeanSquaredError: {
        const Matrix& p = value(n.inputs[0]);
        Matrix gp(p.rows(), p.cols());
        const double c = 2.0 * g(0, 0) / static_cast<double>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) gp.values()[i] = c * (p.values()[i] - n.aux.values()[i]);
        send(n.inputs[0], gp);
        break;
      }
      case Op::MmdRbf:
        send(n.inputs[0], mmd_grad(value(n.inputs[0]), n.aux, n.bandwidths, g(0, 0)));
        break;
      case Op::ForwardOnly:
        throw std::logic_error("backward: no gradient rule registered for op '" + n.name + "' (node " +
                               std::to_string(id) + ")");
    }
  }

  for (const auto& [pid, nid] : param_nodes_) {
    if (!result.contains(pid)) {
      const Matrix& v = nodes_[nid].value;
      result[pid] = Matrix(v.rows(), v.cols());
    }
  }
  return result;
}

// -- finite differences -----------------------------------------------------

namespace {

double relative_error(double a, double fd) {
  return std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
}

void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw std::runtime_error("finite_diff_check: non-finite objective at " + where);
}

}  // namespace

namespace {

// Derivative estimate at one coordinate; `at(v)` evaluates f with the
// coordinate set to v.
double fd_estimate(const std::function<double(double)>& at, double x, double h, FdScheme scheme,
                   const std::string& where) {
  auto central = [&](double step) {
    const double fp = at(x + step);
    const double fm = at(x - step);
    require_finite(fp, where);
    require_finite(fm, where);
    return (fp - fm) / (2.0 * step);
  };
  if (scheme == FdScheme::Central) return central(h);
  return (4.0 * central(h / 2) - central(h)) / 3.0;
}

}  // namespace

double finite_diff_check(const std::function<double()>& f, std::span<Matrix* const> params,
                         const GradientMap& analytic, double h, FdScheme scheme) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff_check: step must be positive");
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& m = *params[p];
    const Matrix zero(m.rows(), m.cols());
    const Matrix& g = analytic.contains(p) ? analytic.at(p) : zero;
    if (g.rows() != m.rows() || g.cols() != m.cols()) {
      throw std::invalid_argument("finite_diff_check: gradient shape mismatch for parameter " + std::to_string(p));
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      double& x = m.values()[i];
      const double saved = x;
      const auto at = [&](double v) {
        x = v;
        const double out = f();
        x = saved;
        return out;
      };
      const double fd = fd_estimate(at, saved, h, scheme,
                                    "parameter " + std::to_string(p) + " coordinate " + std::to_string(i));
      worst = std::max(worst, relative_error(g.values()[i], fd));
    }
  }
  return worst;
}

double finite_diff_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                         std::span<const double> analytic, double h, FdScheme scheme) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff_check: step must be positive");
  if (analytic.size() != x.size()) throw std::invalid_argument("finite_diff_check: gradient length mismatch");
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    const auto at = [&](double v) {
      probe[i] = v;
      const double out = f(probe);
      probe[i] = saved;
      return out;
    };
    worst = std::max(worst, relative_error(analytic[i], fd_estimate(at, saved, h, scheme, "coordinate " + std::to_string(i))));
  }
  return worst;
}

}  // namespace cope::ad
