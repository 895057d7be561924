#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "rvr/errors.hpp"
#include "rvr/experiment.hpp"

using namespace rvr;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "problem": {"kind": "pca", "n": 300, "d": 8, "r": 2, "seed": 1},
  "optimizers": [
    {"algorithm": "RSVRG", "epochs": 3, "step": {"kind": "fixed", "eta": 0.004}},
    {"algorithm": "RAbaSVRG", "label": "aba", "epochs": 3, "step": {"kind": "fixed", "eta": 0.004},
     "batch": {"kind": "adaptive", "c_beta": "inf", "initial": 300}}
  ],
  "seed": 5, "repetitions": 2, "record_time": false
})";

TraceRecord rec(std::uint64_t ifo, std::optional<double> gap) {
  TraceRecord r;
  r.algorithm = "x";
  r.ifo = ifo;
  r.gap = gap;
  return r;
}

}  // namespace

TEST(Config, ParsesAndDerivesSeeds) {
  const ExperimentConfig c = parse_experiment_config(kSmall);
  EXPECT_EQ(c.problem.kind, DatasetKind::Pca);
  EXPECT_EQ(c.problem.n, 300u);
  ASSERT_EQ(c.optimizers.size(), 2u);
  EXPECT_EQ(c.optimizers[0].label, "RSVRG");
  EXPECT_EQ(c.optimizers[1].label, "aba");
  EXPECT_TRUE(std::isinf(std::get<AdaptiveBatch>(c.optimizers[1].config.batch).c_beta));
  ASSERT_EQ(c.seeds.size(), 2u);
  EXPECT_EQ(c.seeds[0], derive_seed(5, Stream::Repetition, 0));
  EXPECT_NE(c.seeds[0], c.seeds[1]);
  EXPECT_FALSE(c.record_time);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_experiment_config(R"({"problem": {"kind": "pca"}, "optimizers": [], "x": 1})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"problem": {"kind": "pca"}, "optimizers": []})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(
                   R"({"problem": {"kind": "pca"}, "optimizers": [{"algorithm": "RSD", "stepp": 1}]})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_config("{not json"), ConfigError);
  EXPECT_THROW(parse_experiment_config(
                   R"({"problem": {"kind": "pca"}, "optimizers": [{"algorithm": "RSD"}],
                       "seeds": [1, 1]})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(
                   R"({"problem": {"kind": "pca"}, "optimizers": [{"algorithm": "RSD"},
                       {"algorithm": "RSD"}]})"),
               ConfigError);
}

TEST(Summary, FirstCrossingPerTargetAndMonotone) {
  const std::vector<TraceRecord> t = {rec(0, 1.0), rec(10, 5e-3), rec(20, 5e-5), rec(30, 1e-9)};
  const SummaryRow s = summarize(t, false);
  EXPECT_EQ(s.ifo_to_gap[0], 10u);
  EXPECT_EQ(s.ifo_to_gap[1], 20u);
  EXPECT_EQ(s.ifo_to_gap[2], 20u);
  EXPECT_EQ(s.ifo_to_gap[3], 30u);
  EXPECT_EQ(s.ifo_to_gap[6], 30u);
  for (std::size_t g = 1; g < kGapTargets.size(); ++g)
    EXPECT_GE(*s.ifo_to_gap[g], *s.ifo_to_gap[g - 1]);
  const SummaryRow none = summarize({rec(0, std::nullopt)}, true);
  EXPECT_TRUE(none.diverged);
  EXPECT_FALSE(none.ifo_to_gap[0].has_value());
}

TEST(Experiment, WritesArtifactsDeterministically) {
  const ExperimentConfig c = parse_experiment_config(kSmall);
  const fs::path dir = fs::temp_directory_path() / "rvr_experiment_test";
  fs::remove_all(dir);
  const ExperimentResult r = run_experiment(c, dir.string());
  ASSERT_TRUE(r.oracle.has_value());
  EXPECT_EQ(r.runs.size(), 4u);
  EXPECT_FALSE(r.any_diverged());
  for (const char* f : {"RSVRG_rep0.csv", "RSVRG_rep1.csv", "aba_rep0.csv", "aba_rep1.csv",
                        "summary.csv", "plot_data.csv", "plot.gp"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  // c_β = ∞ with B¹ = n reduces to the vanilla method, up to the label column.
  for (std::size_t rep = 0; rep < 2; ++rep) {
    const auto& a = r.runs[rep].trace;
    const auto& b = r.runs[2 + rep].trace;
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].cost, b[i].cost);
      EXPECT_EQ(a[i].ifo, b[i].ifo);
    }
  }
  std::ifstream summary(dir / "summary.csv");
  std::string header;
  std::getline(summary, header);
  EXPECT_NE(header.find("ifo_to_gap_1e-6"), std::string::npos);
  for (const auto& run : r.runs) EXPECT_TRUE(run.trace.back().gap.has_value());
  fs::remove_all(dir);
}

TEST(Experiment, OracleNoneLeavesGapEmpty) {
  ExperimentConfig c = parse_experiment_config(kSmall);
  c.oracle = OracleMode::None;
  const ExperimentResult r = run_experiment(c);
  EXPECT_FALSE(r.oracle.has_value());
  for (const auto& run : r.runs) EXPECT_FALSE(run.trace.back().gap.has_value());
}

TEST(Experiment, LrmcRecordsTestMse) {
  const ExperimentConfig c = parse_experiment_config(R"({
    "problem": {"kind": "lrmc", "n": 200, "d": 15, "r": 2, "os": 6, "seed": 3},
    "optimizers": [{"algorithm": "RSRG", "epochs": 2, "step": {"kind": "fixed", "eta": 0.01}}],
    "record_time": false})");
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_TRUE(r.runs[0].trace.back().test_mse.has_value());
}

TEST(Experiment, DivergedRunIsReportedNotThrown) {
  const ExperimentConfig c = parse_experiment_config(R"({
    "problem": {"kind": "spd", "n": 40, "d": 3, "seed": 4},
    "optimizers": [{"algorithm": "RSVRG", "epochs": 20, "step": {"kind": "fixed", "eta": 50}}],
    "record_time": false})");
  const ExperimentResult r = run_experiment(c);
  EXPECT_TRUE(r.any_diverged());
  EXPECT_TRUE(r.summary[0].diverged);
  EXPECT_FALSE(r.runs[0].message.empty());
}

TEST(Sweep, DefaultGrids) {
  const auto eta = default_eta_grid(-3);
  ASSERT_EQ(eta.size(), 9u);
  EXPECT_DOUBLE_EQ(eta.front(), 1e-3);
  EXPECT_DOUBLE_EQ(eta.back(), 9e-3);
  const auto cb = default_c_beta_grid(2);
  ASSERT_EQ(cb.size(), 8u);
  EXPECT_DOUBLE_EQ(cb.front(), 100.0);
  EXPECT_DOUBLE_EQ(cb.back(), 1500.0);
}

TEST(Sweep, TunesEtaThenCBeta) {
  ExperimentConfig c = parse_experiment_config(kSmall);
  std::get<AdaptiveBatch>(c.optimizers[1].config.batch).c_beta = 1.0;
  const SweepResult s = grid_sweep(c, {1e-4, 4e-3}, {1e2, 1e5});
  ASSERT_EQ(s.best.size(), 2u);
  // The larger step wins on this short budget; the adaptive entry inherits it.
  EXPECT_DOUBLE_EQ(std::get<FixedStep>(s.best[0].config.step).eta, 4e-3);
  EXPECT_DOUBLE_EQ(std::get<FixedStep>(s.best[1].config.step).eta, 4e-3);
  EXPECT_EQ(s.evaluations.size(), 4u);
  for (const auto& e : s.evaluations) EXPECT_GE(e.score, 0.0);
}
