#pragma once

#include <array>
#include <span>

#include "cope/autodiff.hpp"
#include "cope/tensor.hpp"

namespace cope {

/// Mean squared error over all entries.
double mse_loss(const Matrix& pred, const Matrix& target);

/// Biased (V-statistic) squared MMD with RBF kernels exp(-|a-b|^2 / (2 s^2)),
/// summed over the bandwidths.
double mmd_loss(const Matrix& x, const Matrix& y, std::span<const double> bandwidths);

inline constexpr std::array<double, 5> kBandwidthMultipliers{0.25, 0.5, 1.0, 2.0, 4.0};

/// Multipliers times the median pairwise distance between rows of `real`
/// (falls back to 1 when that median is zero).
std::vector<double> median_bandwidths(const Matrix& real,
                                      std::span<const double> multipliers = kBandwidthMultipliers);

struct GanLosses {
  double discriminator;
  double generator;
};

/// Non-saturating objective: D minimizes softplus(-real) + softplus(fake)
/// (batch means), G minimizes softplus(-fake).
GanLosses nonsat_gan_losses(std::span<const double> real_logits, std::span<const double> fake_logits);

/// min(|g1 - g2|_1 / |z1 - z2|_1, tau). Rejects z1 == z2.
double diversity_regularizer(std::span<const double> g1, std::span<const double> g2, std::span<const double> z1,
                             std::span<const double> z2, double tau = 10.0);

/// Batch mean of the diversity ratio on a tape; rows of g1/g2 pair with rows
/// of the fixed noise batches z1/z2.
ad::NodeId diversity_term(ad::Tape& tape, ad::NodeId g1, ad::NodeId g2, const Matrix& z1, const Matrix& z2,
                          double tau = 10.0);

}  // namespace cope
