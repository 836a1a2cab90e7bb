#pragma once

#include <random>
#include <vector>

#include "cope/rng.hpp"
#include "cope/tensor.hpp"

namespace cope::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  return sample_uniform(rows, cols, -1.0, 1.0, rng);
}

inline Vector random_vector(std::size_t n, std::mt19937_64& rng) { return sample_uniform_vector(n, -1.0, 1.0, rng); }

inline DenseTensor random_tensor(Shape shape, std::mt19937_64& rng) {
  DenseTensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

/// Enumerates every multi-index of `shape`, last index fastest.
template <class F>
void for_each_index(const Shape& shape, F&& f) {
  std::vector<std::size_t> idx(shape.size(), 0);
  for (std::size_t s : shape)
    if (s == 0) return;
  while (true) {
    f(idx);
    std::size_t k = shape.size();
    while (k > 0) {
      --k;
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (shape.empty()) return;
  }
}

}  // namespace cope::testing
