// Serial reference kernel vs the OpenMP block-tree kernel on full-batch
// evaluations. Usage: batch_gradient_bench [repeats] [threads]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <memory>

#include "rvr/kernels.hpp"
#include "rvr/problems.hpp"

namespace {

template <class F>
double best_ms(int repeats, F&& f) {
  double best = 1e300;
  for (int k = 0; k < repeats; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void bench(const char* name, const rvr::StochasticProblem& problem, int repeats) {
  rvr::Rng rng(7);
  const rvr::ManifoldPoint x = rvr::random_point(problem.manifold(), rng);
  const auto& all = problem.all_indices();
  double sink = 0.0;
  const double serial = best_ms(repeats, [&] { sink += problem.evaluate_batch_serial(x, all).cost; });
  const double parallel = best_ms(repeats, [&] { sink += problem.evaluate_batch(x, all).cost; });
  const double diff = std::abs(problem.evaluate_batch_serial(x, all).cost - problem.evaluate_batch(x, all).cost);
  std::cout << name << " n=" << problem.size() << "  serial " << serial << " ms  parallel "
            << parallel << " ms  speedup " << serial / parallel << "  |cost diff| " << diff
            << (sink == 0.12345 ? " " : "") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  if (argc > 2) rvr::kernels::set_threads(std::atoi(argv[2]));
  std::cout << "threads: " << rvr::kernels::max_threads() << "\n";

  rvr::Rng rng(1, rvr::Stream::Dataset);
  auto pca = std::make_shared<const rvr::PcaDataset>(rvr::gen_pca(100000, 200, 5, rng));
  bench("pca", *rvr::pca_problem(pca), repeats);

  rvr::LrmcOptions lo;
  lo.n = 5000;
  lo.d = 100;
  auto lrmc = std::make_shared<const rvr::LrmcDataset>(rvr::gen_lrmc(lo, rng));
  bench("lrmc", *rvr::lrmc_problem(lrmc), repeats);

  auto spd = std::make_shared<const rvr::SpdDataset>(rvr::gen_spd(5000, 10, 20.0, rng));
  bench("rkm", *rvr::rkm_problem(spd), repeats);
  return 0;
}
