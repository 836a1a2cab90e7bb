#include "cope/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cope {

namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string join_shape(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                                b.shape_string());
  }
}

void check_mode(std::size_t mode, std::size_t order) {
  if (mode < 1 || mode > order) {
    throw std::invalid_argument("mode " + std::to_string(mode) + " out of range for tensor of order " +
                                std::to_string(order));
  }
}

// Advance a multi-index (last index fastest). Returns false on wrap-around.
bool increment(std::vector<std::size_t>& index, const Shape& shape) {
  for (std::size_t k = shape.size(); k-- > 0;) {
    if (++index[k] < shape[k]) return true;
    index[k] = 0;
  }
  return false;
}

// Column strides of the mode-m unfolding: J_k = prod_{n < k, n != m} I_n.
std::vector<std::size_t> unfold_strides(const Shape& shape, std::size_t mode) {
  std::vector<std::size_t> strides(shape.size(), 0);
  std::size_t running = 1;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k + 1 == mode) continue;
    strides[k] = running;
    running *= shape[k];
  }
  return strides;
}

}  // namespace

// -- Matrix -----------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) + " != " +
                                std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::column_vector(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Vector Matrix::column(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

std::string Matrix::shape_string() const { return join_shape({rows_, cols_}); }

// -- DenseTensor ------------------------------------------------------------

DenseTensor::DenseTensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (auto s : shape_) {
    if (s == 0) throw std::invalid_argument("DenseTensor: zero-sized mode in shape " + join_shape(shape_));
  }
  data_.assign(product(shape_), fill);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto s : shape_) {
    if (s == 0) throw std::invalid_argument("DenseTensor: zero-sized mode in shape " + join_shape(shape_));
  }
  if (data_.size() != product(shape_)) {
    throw std::invalid_argument("DenseTensor: data length " + std::to_string(data_.size()) +
                                " does not match shape " + join_shape(shape_));
  }
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
  return DenseTensor({m.rows(), m.cols()}, std::vector<double>(m.values().begin(), m.values().end()));
}

DenseTensor DenseTensor::from_vector(std::span<const double> v) {
  return DenseTensor({v.size()}, std::vector<double>(v.begin(), v.end()));
}

std::size_t DenseTensor::dim(std::size_t mode) const {
  check_mode(mode, order());
  return shape_[mode - 1];
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw std::invalid_argument("DenseTensor: index arity " + std::to_string(index.size()) +
                                " != order " + std::to_string(shape_.size()));
  }
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    if (index[k] >= shape_[k]) throw std::out_of_range("DenseTensor: index out of range");
    flat = flat * shape_[k] + index[k];
  }
  return flat;
}

double& DenseTensor::at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }
double DenseTensor::at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

Matrix DenseTensor::to_matrix() const {
  switch (order()) {
    case 0: return Matrix(1, 1, data_);
    case 1: return Matrix(shape_[0], 1, data_);
    case 2: return Matrix(shape_[0], shape_[1], data_);
    default:
      throw std::invalid_argument("DenseTensor::to_matrix: order " + std::to_string(order()) +
                                  " tensor is not a matrix");
  }
}

std::string DenseTensor::shape_string() const { return join_shape(shape_); }

// -- matrix helpers ---------------------------------------------------------

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ " + a.shape_string() + " * " +
                                b.shape_string());
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      const auto brow = b.row(p);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aip * brow[j];
    }
  }
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] += bv[i];
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  for (auto& v : c.values()) v *= s;
  return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw std::invalid_argument("matvec: matrix " + a.shape_string() + " vs vector of length " +
                                std::to_string(x.size()));
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    throw std::invalid_argument("matvec_transposed: matrix " + a.shape_string() + " vs vector of length " +
                                std::to_string(x.size()));
  }
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * x[i];
  }
  return y;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("max_abs_diff: lengths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  return max_abs_diff(a.values(), b.values());
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("max_abs_diff: tensor shapes " + a.shape_string() + " and " +
                                b.shape_string());
  }
  return max_abs_diff(a.values(), b.values());
}

Vector kronecker(std::span<const double> a, std::span<const double> b) {
  Vector out;
  out.reserve(a.size() * b.size());
  for (double x : a)
    for (double y : b) out.push_back(x * y);
  return out;
}

// -- tensor kernels ---------------------------------------------------------

Matrix mode_unfold(const DenseTensor& t, std::size_t mode) {
  check_mode(mode, t.order());
  const Shape& shape = t.shape();
  const auto strides = unfold_strides(shape, mode);
  Matrix out(shape[mode - 1], t.size() / shape[mode - 1]);
  std::vector<std::size_t> index(shape.size(), 0);
  std::size_t flat = 0;
  do {
    std::size_t col = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) col += index[k] * strides[k];
    out(index[mode - 1], col) = t[flat++];
  } while (increment(index, shape));
  return out;
}

DenseTensor mode_fold(const Matrix& unfolded, std::size_t mode, const Shape& shape) {
  check_mode(mode, shape.size());
  DenseTensor t(shape);
  if (unfolded.rows() != shape[mode - 1] || unfolded.cols() * unfolded.rows() != t.size()) {
    throw std::invalid_argument("mode_fold: matrix " + unfolded.shape_string() +
                                " cannot be folded into shape " + t.shape_string() + " along mode " +
                                std::to_string(mode));
  }
  const auto strides = unfold_strides(shape, mode);
  std::vector<std::size_t> index(shape.size(), 0);
  std::size_t flat = 0;
  do {
    std::size_t col = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) col += index[k] * strides[k];
    t[flat++] = unfolded(index[mode - 1], col);
  } while (increment(index, shape));
  return t;
}

DenseTensor mode_vec_product(const DenseTensor& t, std::size_t mode, std::span<const double> u) {
  check_mode(mode, t.order());
  const Shape& shape = t.shape();
  const std::size_t im = shape[mode - 1];
  if (u.size() != im) {
    throw std::invalid_argument("mode_vec_product: mode " + std::to_string(mode) + " has size " +
                                std::to_string(im) + " but vector has length " + std::to_string(u.size()));
  }
  std::size_t outer = 1;
  for (std::size_t k = 0; k + 1 < mode; ++k) outer *= shape[k];
  std::size_t inner = 1;
  for (std::size_t k = mode; k < shape.size(); ++k) inner *= shape[k];

  Shape out_shape;
  out_shape.reserve(shape.size() - 1);
  for (std::size_t k = 0; k < shape.size(); ++k)
    if (k + 1 != mode) out_shape.push_back(shape[k]);

  std::vector<double> out(outer * inner, 0.0);
  const auto v = t.values();
  for (std::size_t a = 0; a < outer; ++a) {
    for (std::size_t b = 0; b < inner; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < im; ++i) s += v[(a * im + i) * inner + b] * u[i];
      out[a * inner + b] = s;
    }
  }
  return DenseTensor(std::move(out_shape), std::move(out));
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ " + a.shape_string() + " vs " +
                                b.shape_string());
  }
  Matrix out(a.rows() * b.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      for (std::size_t c = 0; c < a.cols(); ++c) out(i * b.rows() + j, c) = a(i, c) * b(j, c);
  return out;
}

Matrix khatri_rao(std::span<const Matrix> factors) {
  if (factors.empty()) throw std::invalid_argument("khatri_rao: empty factor list");
  Matrix out = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) out = khatri_rao(out, factors[i]);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] *= bv[i];
  return c;
}

Vector hadamard(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("hadamard: lengths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
  }
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
  return c;
}

DenseTensor cp_reconstruct(std::span<const Matrix> factors) {
  if (factors.empty()) throw std::invalid_argument("cp_reconstruct: no factors");
  const std::size_t rank = factors[0].cols();
  Shape shape;
  for (std::size_t m = 0; m < factors.size(); ++m) {
    if (factors[m].cols() != rank) {
      throw std::invalid_argument("cp_reconstruct: factor " + std::to_string(m + 1) + " has rank " +
                                  std::to_string(factors[m].cols()) + ", expected " + std::to_string(rank));
    }
    shape.push_back(factors[m].rows());
  }
  DenseTensor t(shape);
  std::vector<std::size_t> index(shape.size(), 0);
  std::size_t flat = 0;
  do {
    double s = 0.0;
    for (std::size_t r = 0; r < rank; ++r) {
      double p = 1.0;
      for (std::size_t m = 0; m < factors.size(); ++m) p *= factors[m](index[m], r);
      s += p;
    }
    t[flat++] = s;
  } while (increment(index, shape));
  return t;
}

}  // namespace cope
