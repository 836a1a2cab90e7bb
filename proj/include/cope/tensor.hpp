#pragma once

// Dense real tensors and the handful of multilinear-algebra kernels the
// polynomial models and their oracles are written in terms of.
//
// Layout: row-major, first index slowest. The mode-m unfolding does NOT rely
// on that layout; it follows the index map
//     j = sum_{k != m} i_k * J_k,   J_k = prod_{n < k, n != m} I_n
// (0-based), so the first remaining mode runs fastest along the columns.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cope {

using Vector = std::vector<double>;
using Shape = std::vector<std::size_t>;

/// Row-major dense matrix. Also used for factor matrices (rows = dimension
/// size, cols = rank) and, with a single row, for bias-like parameters.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix row_vector(std::span<const double> values);
  static Matrix column_vector(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  Vector column(std::size_t c) const;
  std::string shape_string() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Arbitrary-order dense tensor. An empty shape denotes an order-0 tensor
/// holding a single scalar.
class DenseTensor {
 public:
  DenseTensor() : data_(1, 0.0) {}
  explicit DenseTensor(Shape shape, double fill = 0.0);
  DenseTensor(Shape shape, std::vector<double> data);

  static DenseTensor from_matrix(const Matrix& m);
  static DenseTensor from_vector(std::span<const double> v);

  std::size_t order() const { return shape_.size(); }
  const Shape& shape() const { return shape_; }
  std::size_t dim(std::size_t mode) const;  // 1-based mode
  std::size_t size() const { return data_.size(); }

  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;
  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  /// Valid for order <= 2; order-1 tensors become column vectors.
  Matrix to_matrix() const;
  std::string shape_string() const;

  bool operator==(const DenseTensor&) const = default;

 private:
  std::size_t flat_index(std::span<const std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

// -- matrix helpers ---------------------------------------------------------

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Vector matvec(const Matrix& a, std::span<const double> x);
/// a^T x without forming the transpose.
Vector matvec_transposed(const Matrix& a, std::span<const double> x);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

/// Kronecker product of two vectors: a slowest, b fastest.
Vector kronecker(std::span<const double> a, std::span<const double> b);

// -- tensor kernels ---------------------------------------------------------

/// Mode-m unfolding (m is 1-based) into an I_m x prod_{k != m} I_k matrix.
Matrix mode_unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of mode_unfold for a tensor of the given shape.
DenseTensor mode_fold(const Matrix& unfolded, std::size_t mode, const Shape& shape);

/// Contracts mode m (1-based) with u; the result has order M - 1 and keeps the
/// remaining modes in their original order.
DenseTensor mode_vec_product(const DenseTensor& t, std::size_t mode, std::span<const double> u);

/// Column-wise Kronecker product; row (i, j) of the result is i * rows(b) + j.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Khatri-Rao chain a_1 (.) a_2 (.) ... (.) a_n, left to right.
Matrix khatri_rao(std::span<const Matrix> factors);

Matrix hadamard(const Matrix& a, const Matrix& b);
Vector hadamard(std::span<const double> a, std::span<const double> b);

/// Sum of R rank-one outer products, one per column of the factor matrices.
/// Factor m supplies mode m + 1 of the result.
DenseTensor cp_reconstruct(std::span<const Matrix> factors);

}  // namespace cope
