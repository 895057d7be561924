#include "rvr/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "rvr/errors.hpp"

namespace rvr {

std::vector<std::size_t> draw_distinct(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw ConfigError("cannot draw more distinct indices than the population size");
  std::vector<std::size_t> out;
  out.reserve(k);
  if (2 * k >= n) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.index(n - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }
  // Sparse swap table: only displaced positions are stored.
  std::unordered_map<std::size_t, std::size_t> moved;
  moved.reserve(2 * k);
  auto at = [&moved](std::size_t i) {
    auto it = moved.find(i);
    return it == moved.end() ? i : it->second;
  };
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(n - i);
    const std::size_t vi = at(i);
    const std::size_t vj = at(j);
    moved[j] = vi;
    out.push_back(vj);
  }
  return out;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t b, Rng& rng) {
  if (b < 1 || b > n) throw ConfigError("without-replacement batch size must satisfy 1 <= B <= n");
  if (b == n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  auto out = draw_distinct(n, b, rng);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> sample_with_replacement(std::size_t n, std::size_t b, Rng& rng) {
  if (n < 1 || b < 1) throw ConfigError("with-replacement sampling needs n >= 1 and b >= 1");
  std::vector<std::size_t> out(b);
  for (auto& i : out) i = rng.index(n);
  return out;
}

}  // namespace rvr
