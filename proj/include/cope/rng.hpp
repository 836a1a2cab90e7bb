#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "cope/tensor.hpp"

namespace cope {

/// Seed of the stream named `concern` under `master`. Streams for different
/// names are independent, so adding a consumer never shifts another's draws.
std::uint64_t derive_seed(std::uint64_t master, std::string_view concern);

inline std::mt19937_64 make_stream(std::uint64_t master, std::string_view concern) {
  return std::mt19937_64(derive_seed(master, concern));
}

Matrix sample_uniform(std::size_t rows, std::size_t cols, double lo, double hi, std::mt19937_64& rng);
Matrix sample_normal(std::size_t rows, std::size_t cols, double mean, double stddev, std::mt19937_64& rng);
Vector sample_uniform_vector(std::size_t n, double lo, double hi, std::mt19937_64& rng);

}  // namespace cope
