#include "cope/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cope {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double mean_of(std::span<const double> v, auto f) {
  if (v.empty()) throw std::invalid_argument("nonsat_gan_losses: empty logit batch");
  double s = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("nonsat_gan_losses: non-finite logit");
    s += f(x);
  }
  return s / static_cast<double>(v.size());
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("diversity_regularizer: lengths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

double mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("mse_loss: shapes " + pred.shape_string() + " and " + target.shape_string());
  if (pred.size() == 0) throw std::invalid_argument("mse_loss: empty batch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.values()[i] - target.values()[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

double mmd_loss(const Matrix& x, const Matrix& y, std::span<const double> bandwidths) {
  ad::Tape tape;
  return tape.scalar(tape.mmd_rbf(tape.constant(x), y, bandwidths));
}

std::vector<double> median_bandwidths(const Matrix& real, std::span<const double> multipliers) {
  std::vector<double> distances;
  for (std::size_t i = 0; i < real.rows(); ++i)
    for (std::size_t j = i + 1; j < real.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < real.cols(); ++p) {
        const double d = real(i, p) - real(j, p);
        s += d * d;
      }
      distances.push_back(std::sqrt(s));
    }
  double median = 1.0;
  if (!distances.empty()) {
    auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
    std::nth_element(distances.begin(), mid, distances.end());
    if (*mid > 0) median = *mid;
  }
  std::vector<double> out;
  for (double m : multipliers) out.push_back(m * median);
  return out;
}

GanLosses nonsat_gan_losses(std::span<const double> real_logits, std::span<const double> fake_logits) {
  const double d_real = mean_of(real_logits, [](double x) { return softplus(-x); });
  const double d_fake = mean_of(fake_logits, [](double x) { return softplus(x); });
  const double g = mean_of(fake_logits, [](double x) { return softplus(-x); });
  return {d_real + d_fake, g};
}

double diversity_regularizer(std::span<const double> g1, std::span<const double> g2, std::span<const double> z1,
                             std::span<const double> z2, double tau) {
  if (!(tau > 0)) throw std::invalid_argument("diversity_regularizer: tau must be positive");
  const double dz = l1_distance(z1, z2);
  if (dz == 0.0) throw std::invalid_argument("diversity_regularizer: noise samples are identical");
  return std::min(l1_distance(g1, g2) / dz, tau);
}

ad::NodeId diversity_term(ad::Tape& tape, ad::NodeId g1, ad::NodeId g2, const Matrix& z1, const Matrix& z2,
                          double tau) {
  if (!(tau > 0)) throw std::invalid_argument("diversity_term: tau must be positive");
  if (z1.rows() != z2.rows() || z1.cols() != z2.cols() || z1.rows() != tape.value(g1).rows())
    throw std::invalid_argument("diversity_term: noise batches do not pair with outputs");
  Matrix inv_dz(z1.rows(), 1);
  for (std::size_t i = 0; i < z1.rows(); ++i) {
    const double dz = l1_distance(z1.row(i), z2.row(i));
    if (dz == 0.0) throw std::invalid_argument("diversity_term: identical noise rows at " + std::to_string(i));
    inv_dz(i, 0) = 1.0 / dz;
  }
  const std::size_t out_dim = tape.value(g1).cols();
  const ad::NodeId row_l1 = tape.matmul(tape.abs(tape.sub(g1, g2)), tape.constant(Matrix(out_dim, 1, 1.0)));
  const ad::NodeId ratio = tape.hadamard(row_l1, tape.constant(std::move(inv_dz)));
  return tape.mean(tape.clamp_max(ratio, tau));
}

}  // namespace cope
