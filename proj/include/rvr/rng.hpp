#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace rvr {

// Stream identifiers. A root seed plus (stream, a, b) names one independent
// generator, so e.g. the minibatch drawn at (epoch s, step t) never depends on
// how many reference-batch draws happened before it.
enum class Stream : std::uint64_t {
  Dataset = 1,
  InitialPoint = 2,
  ReferenceBatch = 3,
  MiniBatch = 4,
  OutputSelection = 5,
  SpiderRefresh = 6,
  SpiderMiniBatch = 7,
  SgdMiniBatch = 8,
  Restart = 9,
  GradientCheck = 10,
  Repetition = 11,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                    std::uint64_t a = 0,
                                    std::uint64_t b = 0) noexcept {
  std::uint64_t h = splitmix64(root);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t root, Stream stream, std::uint64_t a = 0,
      std::uint64_t b = 0)
      : engine_(derive_seed(root, stream, a, b)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rvr
