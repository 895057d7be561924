#pragma once

#include <cstddef>
#include <vector>

#include "rvr/rng.hpp"

namespace rvr {

// k distinct indices from [0, n) in uniformly random order (sparse
// Fisher–Yates, O(k) memory). Requires k ≤ n.
std::vector<std::size_t> draw_distinct(std::size_t n, std::size_t k, Rng& rng);

// Uniform size-B subset of [0, n), returned sorted. B = n yields 0..n−1
// without consuming randomness. Throws ConfigError unless 1 ≤ B ≤ n.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t b, Rng& rng);

// b i.i.d. uniform indices from [0, n).
std::vector<std::size_t> sample_with_replacement(std::size_t n, std::size_t b, Rng& rng);

}  // namespace rvr
