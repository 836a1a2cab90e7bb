#include "cope/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cope {

namespace {

void check_shape(const Matrix& grad, const Matrix& param, std::size_t i) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols()) {
    throw std::invalid_argument("optimizer: gradient " + std::to_string(i) + " has shape " + grad.shape_string() +
                                " but parameter has " + param.shape_string());
  }
}

}  // namespace

OptState make_adam_state(std::span<Matrix* const> params, const AdamConfig& config) {
  if (!(config.lr > 0) || !(config.beta1 >= 0 && config.beta1 < 1) || !(config.beta2 >= 0 && config.beta2 < 1) ||
      !(config.eps > 0)) {
    throw std::invalid_argument("adam: need lr > 0, 0 <= beta < 1, eps > 0");
  }
  OptState s{config, {}, {}, 0};
  for (const Matrix* p : params) {
    s.m.emplace_back(p->rows(), p->cols());
    s.v.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(OptState& state, const ad::GradientMap& grads, std::span<Matrix* const> params) {
  if (params.size() != state.m.size())
    throw std::invalid_argument("adam_step: state tracks " + std::to_string(state.m.size()) + " parameters, got " +
                                std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].rows() != params[i]->rows() || state.m[i].cols() != params[i]->cols())
      throw std::invalid_argument("adam_step: parameter " + std::to_string(i) + " changed shape");
    if (grads.contains(i)) check_shape(grads.at(i), *params[i], i);
  }
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    const Matrix* g = grads.contains(i) ? &grads.at(i) : nullptr;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g ? g->values()[j] : 0.0;
      m[j] = c.beta1 * m[j] + (1 - c.beta1) * gj;
      v[j] = c.beta2 * v[j] + (1 - c.beta2) * gj * gj;
      p[j] -= c.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + c.eps);
    }
  }
}

void sgd_step(double lr, const ad::GradientMap& grads, std::span<Matrix* const> params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads.contains(i)) continue;
    const Matrix& g = grads.at(i);
    check_shape(g, *params[i], i);
    auto p = params[i]->values();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g.values()[j];
  }
}

}  // namespace cope
