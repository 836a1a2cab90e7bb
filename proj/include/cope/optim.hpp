#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cope/autodiff.hpp"
#include "cope/tensor.hpp"

namespace cope {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam moments for a fixed list of parameters (same order as the pointers
/// passed to adam_step, which is also the gradient id order).
struct OptState {
  AdamConfig config;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t step = 0;
};

OptState make_adam_state(std::span<Matrix* const> params, const AdamConfig& config = {});

/// One bias-corrected Adam update. Parameter i reads gradient id i; a missing
/// gradient counts as zero.
void adam_step(OptState& state, const ad::GradientMap& grads, std::span<Matrix* const> params);

/// Plain gradient descent.
void sgd_step(double lr, const ad::GradientMap& grads, std::span<Matrix* const> params);

}  // namespace cope
