#include <cmath>

#include <gtest/gtest.h>

#include "rvr/errors.hpp"
#include "rvr/problems.hpp"
#include "rvr/restart.hpp"
#include "support.hpp"

using namespace rvr;

TEST(Restart, StageCount) {
  EXPECT_EQ(restart_stage_count(1.0, 1e-3), 10u);
  EXPECT_EQ(restart_stage_count(1.0, 0.5), 1u);
  EXPECT_EQ(restart_stage_count(1.0, 2.0), 1u);
  EXPECT_EQ(restart_stage_count(8.0, 1.0), 3u);
  EXPECT_THROW(restart_stage_count(0.0, 1.0), ConfigError);
  EXPECT_THROW(restart_stage_count(1.0, -1.0), ConfigError);
}

TEST(Restart, AccuracySequenceIsExactHalving) {
  for (std::size_t k = 0; k < 40; ++k) EXPECT_EQ(restart_accuracy(3.0, k), 3.0 / std::pow(2.0, k));
}

TEST(Restart, VrStagesWarmStartAndConcatenateTrace) {
  auto p = pca_problem(fixtures::pca_data(400, 8, 1, 1));
  Rng rng(2, Stream::InitialPoint);
  RunOptions o;
  o.initial = random_point(p->manifold(), rng);
  const double eps0 = norm(*o.initial, p->rgrad_full(*o.initial));
  OptimizerConfig c;
  c.algorithm = Algorithm::RSVRG;
  c.epochs = 2;
  c.step = FixedStep{5e-3};
  c.record_time = false;
  c.seed = 3;
  const RestartResult r = run_restart_gd_vr(*p, c, eps0, eps0 / 8, std::nullopt, o);
  ASSERT_EQ(r.stages.size(), 3u);
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    EXPECT_EQ(r.stages[i].k, i + 1);
    EXPECT_DOUBLE_EQ(r.stages[i].epsilon, eps0 / std::pow(2.0, i + 1));
    EXPECT_EQ(r.stages[i].budget, 2u);
  }
  EXPECT_EQ(r.ifo, r.stages.back().ifo_end);
  EXPECT_EQ(r.trace.back().ifo, r.ifo);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GT(r.trace[i].ifo, r.trace[i - 1].ifo);
  EXPECT_NEAR(r.stages.back().grad_norm, norm(r.output, p->rgrad_full(r.output)), 1e-12);
}

TEST(Restart, TheoreticalScheduleForVr) {
  auto p = pca_problem(fixtures::pca_data(1000, 6, 1, 4));
  SmoothnessConstants k;
  k.L = k.L_l = 100.0;
  k.mu = k.nu = 1.0;
  k.tau = 0.5;
  OptimizerConfig c;
  c.algorithm = Algorithm::RAbaSVRG;
  AdaptiveBatch ab;
  ab.c_beta = 1e3;
  c.batch = ab;
  c.record_time = false;
  const RestartResult r = run_restart_gd_vr(*p, c, 1.0, 0.25, k);
  ASSERT_EQ(r.stages.size(), 2u);
  const auto& s = r.stages.front();
  EXPECT_EQ(s.inner_loop, 10u);  // ⌊1000^{1/3}⌋
  EXPECT_EQ(s.minibatch, 100u);
  EXPECT_NEAR(s.step_size, theoretical_step_size(k, 10, 100, 4.0, Algorithm::RAbaSVRG), 1e-15);
  EXPECT_EQ(s.budget, static_cast<std::size_t>(std::ceil(16 * 0.5 / (10 * s.step_size))));
}

TEST(Restart, SdSgdStagesFollowClosedForms) {
  auto p = pca_problem(fixtures::pca_data(300, 6, 1, 5));
  SmoothnessConstants k;
  k.L = 4.0;
  k.G = 2.0;
  k.tau = 0.25;
  OptimizerConfig sd;
  sd.algorithm = Algorithm::RSD;
  sd.record_time = false;
  const RestartResult a = run_restart_sd_sgd(*p, sd, 1.0, 0.5, k);
  ASSERT_EQ(a.stages.size(), 1u);
  EXPECT_EQ(a.stages[0].budget, 8u);  // ⌈8·4·0.25⌉
  EXPECT_DOUBLE_EQ(a.stages[0].step_size, 0.25);

  OptimizerConfig sgd = sd;
  sgd.algorithm = Algorithm::RSGD;
  sgd.step = DecayingStep{1e-3, 0.0};
  const RestartResult b = run_restart_sd_sgd(*p, sgd, 1.0, 0.5, k);
  const double eps1 = 0.5;
  const auto t1 = static_cast<std::size_t>(std::ceil(8 * 4.0 * 4.0 * 0.25 / (eps1 * eps1)));
  EXPECT_EQ(b.stages[0].budget, t1);
  const double z = std::sqrt(2 * 0.25 * 1.0 / (4.0 * 4.0));
  EXPECT_NEAR(b.stages[0].step_size, z / std::sqrt(static_cast<double>(t1)), 1e-15);
}

TEST(Restart, RejectsWrongSolverFamilies) {
  auto p = pca_problem(fixtures::pca_data(100, 5, 1, 6));
  OptimizerConfig c;
  c.algorithm = Algorithm::RSD;
  EXPECT_THROW(run_restart_gd_vr(*p, c, 1.0, 0.1), ConfigError);
  c.algorithm = Algorithm::RSVRG;
  EXPECT_THROW(run_restart_sd_sgd(*p, c, 1.0, 0.1), ConfigError);
}
