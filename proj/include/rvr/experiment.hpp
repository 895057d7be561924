#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rvr/dataset_io.hpp"
#include "rvr/optimizer.hpp"
#include "rvr/oracle.hpp"

namespace rvr {

// Where the data comes from: a generator with its parameters or a file.
struct ProblemSpec {
  DatasetKind kind = DatasetKind::Pca;
  std::optional<std::string> path;  // container, or dense CSV for PCA
  std::uint64_t seed = 0;           // generator seed
  std::size_t n = 1000;
  Eigen::Index d = 10;
  Eigen::Index r = 2;
  double cn = 20.0;
  double os = 8.0;
  double eps = 1e-10;
  double test_fraction = 0.1;
};

enum class OracleMode { Auto, None };

struct OptimizerEntry {
  std::string label;  // defaults to the algorithm name
  OptimizerConfig config;
};

struct SweepGrid {
  std::vector<double> eta;     // empty means {1..9} × 10^q
  std::vector<double> c_beta;  // empty means {1, 3, …, 15} × 10^l
  int q = -3;
  int l = 0;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<OptimizerEntry> optimizers;
  std::vector<std::uint64_t> seeds;  // one per repetition, distinct
  std::optional<std::uint64_t> ifo_budget;
  OracleMode oracle = OracleMode::Auto;
  bool record_time = true;
  std::optional<std::string> output_dir;
  SweepGrid sweep;

  void validate() const;
};

// Parses the JSON config tree; unknown keys raise ConfigError.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct LoadedProblem {
  std::shared_ptr<const StochasticProblem> problem;
  Dataset data;
  std::shared_ptr<const LrmcDataset> lrmc;  // set for LRMC, feeds the test metric
};

Dataset make_dataset(const ProblemSpec& spec);
LoadedProblem load_problem(const ProblemSpec& spec);

// Throws DegenerateSpectrum / ConvergenceError / ConfigError on failure.
OracleResult compute_oracle(const LoadedProblem& loaded);

inline constexpr std::array<double, 7> kGapTargets = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};

struct SummaryRow {
  std::string algorithm;
  std::size_t rep = 0;
  bool diverged = false;
  double final_cost = 0.0;
  double final_grad_norm = 0.0;
  std::optional<double> final_gap;
  std::uint64_t ifo = 0;
  std::array<std::optional<std::uint64_t>, kGapTargets.size()> ifo_to_gap;
};

// Pure fold over one trace.
SummaryRow summarize(const std::vector<TraceRecord>& trace, bool diverged);

struct RunRecord {
  std::string label;
  std::size_t rep = 0;
  std::vector<TraceRecord> trace;
  bool diverged = false;
  std::string message;
  std::optional<ManifoldPoint> output;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
  std::optional<OracleResult> oracle;
  bool any_diverged() const;
};

// Runs every optimizer × repetition. With out_dir, writes one trace CSV per
// run (<label>_rep<k>.csv), summary.csv, plot_data.csv and plot.gp.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::string>& out_dir = std::nullopt);

std::string trace_file_name(const std::string& label, std::size_t rep);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

struct SweepPoint {
  std::string label;
  double value;  // η (stage one) or c_β (stage two)
  double score;  // final gap, or final cost without an oracle; +inf on divergence
};

struct SweepResult {
  std::vector<SweepPoint> evaluations;
  std::vector<OptimizerEntry> best;  // every optimizer with its tuned parameter
};

std::vector<double> default_eta_grid(int q);
std::vector<double> default_c_beta_grid(int l);

// Stage one tunes η on the non-adaptive optimizers by final gap, stage two
// freezes each adaptive optimizer's η at its vanilla counterpart's best and
// tunes c_β. Ties go to the smaller value. Uses the first seed only.
SweepResult grid_sweep(const ExperimentConfig& config, std::vector<double> eta_grid,
                       std::vector<double> c_beta_grid);

inline constexpr const char* kPlotHeader =
    "algorithm,rep,ifo,epoch,step,wall_ms,cost,grad_norm,gap,test_mse,batch_size,step_size";

// Long-format rows keyed by (algorithm, rep, ifo); returns gnuplot script text
// that plots gap and gradient norm against IFO on log scales.
std::string emit_plot_data(const std::vector<RunRecord>& runs, const std::string& csv_path);
void write_plot_data(std::ostream& os, const std::vector<RunRecord>& runs);

}  // namespace rvr
