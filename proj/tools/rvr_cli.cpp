// rvr: dataset generation, experiment runs, gradient checks, oracles, sweeps.
// Exit codes: 0 ok, 2 config error, 3 divergence, 4 oracle or check failure.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rvr/dataset_io.hpp"
#include "rvr/experiment.hpp"
#include "rvr/gradient_check.hpp"
#include "rvr/oracle.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDivergence = 3;
constexpr int kOracleFailure = 4;

void add_problem_flags(CLI::App* cmd, rvr::ProblemSpec& spec, std::string& data) {
  cmd->add_option("--data", data, "dataset container (or dense CSV for pca)");
  cmd->add_option("--n", spec.n, "component count");
  cmd->add_option("--d", spec.d, "ambient dimension");
  cmd->add_option("--r", spec.r, "rank (pca, lrmc)");
  cmd->add_option("--cn", spec.cn, "condition number (lrmc, spd)");
  cmd->add_option("--os", spec.os, "oversampling ratio (lrmc)");
  cmd->add_option("--eps", spec.eps, "noise scale (lrmc)");
  cmd->add_option("--test-fraction", spec.test_fraction, "held-out fraction (lrmc)");
  cmd->add_option("--seed", spec.seed, "seed");
}

rvr::ProblemSpec finish_spec(rvr::ProblemSpec spec, const std::string& kind, const std::string& data) {
  spec.kind = rvr::parse_dataset_kind(kind);
  if (!data.empty()) spec.path = data;
  return spec;
}

int cmd_gen(const std::string& kind, rvr::ProblemSpec spec, const std::string& out,
            const std::string& csv) {
  spec = finish_spec(spec, kind, "");
  const rvr::Dataset data = rvr::make_dataset(spec);
  rvr::save_dataset(out, data);
  if (!csv.empty()) rvr::export_dataset_csv(csv, data);
  std::cout << "wrote " << rvr::to_string(spec.kind) << " dataset to " << out << "\n";
  return kOk;
}

int cmd_run(const std::string& config_path, const std::string& out) {
  const rvr::ExperimentConfig config = rvr::load_experiment_config(config_path);
  std::optional<std::string> dir = out.empty() ? config.output_dir : std::optional(out);
  if (!dir) throw rvr::ConfigError("run needs --out or output_dir in the config");
  const rvr::ExperimentResult result = rvr::run_experiment(config, dir);
  if (result.oracle && !rvr::certified(*result.oracle))
    std::cerr << "oracle gradient norm " << result.oracle->grad_norm
              << " exceeds the certificate; gap column omitted\n";
  for (const auto& row : result.summary) {
    std::cout << row.algorithm << " rep " << row.rep << ": "
              << (row.diverged ? "diverged" : "ok") << ", cost " << row.final_cost
              << ", grad_norm " << row.final_grad_norm << ", ifo " << row.ifo << "\n";
  }
  for (const auto& run : result.runs)
    if (run.diverged) std::cerr << run.label << " rep " << run.rep << ": " << run.message << "\n";
  return result.any_diverged() ? kDivergence : kOk;
}

int cmd_check_grad(const rvr::ProblemSpec& spec, std::size_t points, std::size_t directions,
                   double t) {
  const rvr::LoadedProblem loaded = rvr::load_problem(spec);
  const rvr::GradientCheckReport report =
      rvr::check_gradients(*loaded.problem, points, directions, t, spec.seed);
  std::cout << loaded.problem->name() << ": " << report.points << " points x "
            << report.directions << " directions, t = " << report.t
            << ", max relative error = " << report.max_rel_error << " ("
            << (report.passed() ? "pass" : "FAIL") << ")\n";
  return report.passed() ? kOk : kOracleFailure;
}

int cmd_oracle(const rvr::ProblemSpec& spec, const std::string& out) {
  const rvr::LoadedProblem loaded = rvr::load_problem(spec);
  const rvr::OracleResult oracle = rvr::compute_oracle(loaded);
  const Eigen::MatrixXd& p = oracle.point.data();
  nlohmann::json j;
  j["method"] = rvr::to_string(oracle.method);
  j["cost"] = oracle.cost;
  j["grad_norm"] = oracle.grad_norm;
  j["certified"] = rvr::certified(oracle);
  j["iterations"] = oracle.iterations;
  j["rows"] = p.rows();
  j["cols"] = p.cols();
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index k = 0; k < p.cols(); ++k) rows[static_cast<std::size_t>(i)].push_back(p(i, k));
  j["point"] = rows;
  std::ofstream os(out);
  if (!os) throw rvr::ConfigError("cannot open '" + out + "' for writing");
  os << j.dump(2) << "\n";
  std::cout << rvr::to_string(oracle.method) << " oracle: cost " << oracle.cost << ", grad_norm "
            << oracle.grad_norm << "\n";
  return rvr::certified(oracle) || oracle.method == rvr::OracleMethod::GroundTruth ? kOk
                                                                                   : kOracleFailure;
}

int cmd_sweep(const std::string& config_path) {
  const rvr::ExperimentConfig config = rvr::load_experiment_config(config_path);
  auto eta = config.sweep.eta.empty() ? rvr::default_eta_grid(config.sweep.q) : config.sweep.eta;
  auto cb = config.sweep.c_beta.empty() ? rvr::default_c_beta_grid(config.sweep.l) : config.sweep.c_beta;
  const rvr::SweepResult result = rvr::grid_sweep(config, eta, cb);
  std::cout << "label,value,score\n";
  for (const auto& e : result.evaluations)
    std::cout << e.label << ',' << rvr::format_double(e.value) << ',' << rvr::format_double(e.score) << "\n";
  std::cout << "\nbest:\n";
  for (const auto& e : result.best) {
    std::cout << e.label;
    std::visit(
        [](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, rvr::FixedStep> || std::is_same_v<S, rvr::DecayingStep>)
            std::cout << " eta=" << s.eta;
          else if constexpr (std::is_same_v<S, rvr::SpiderAdaptiveStep>)
            std::cout << " beta=" << s.beta;
        },
        e.config.step);
    if (const auto* a = std::get_if<rvr::AdaptiveBatch>(&e.config.batch)) std::cout << " c_beta=" << a->c_beta;
    std::cout << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian variance-reduced optimization benchmarks"};
  app.require_subcommand(1);

  rvr::ProblemSpec gen_spec;
  std::string gen_kind;
  std::string gen_out;
  std::string gen_csv;
  std::string unused_data;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("kind", gen_kind, "pca | lrmc | spd")->required()->check(CLI::IsMember({"pca", "lrmc", "spd"}));
  gen->add_option("--out", gen_out, "output container")->required();
  gen->add_option("--csv", gen_csv, "also export as CSV");
  gen->add_option("--n", gen_spec.n, "component count");
  gen->add_option("--d", gen_spec.d, "ambient dimension");
  gen->add_option("--r", gen_spec.r, "rank (pca, lrmc)");
  gen->add_option("--cn", gen_spec.cn, "condition number (lrmc, spd)");
  gen->add_option("--os", gen_spec.os, "oversampling ratio (lrmc)");
  gen->add_option("--eps", gen_spec.eps, "noise scale (lrmc)");
  gen->add_option("--test-fraction", gen_spec.test_fraction, "held-out fraction (lrmc)");
  gen->add_option("--seed", gen_spec.seed, "seed")->required();

  std::string run_config;
  std::string run_out;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", run_config, "JSON config")->required();
  run->add_option("--out", run_out, "output directory");

  rvr::ProblemSpec check_spec;
  std::string check_kind;
  std::string check_data;
  std::size_t points = 20;
  std::size_t directions = 20;
  double t = 1e-6;
  auto* check = app.add_subcommand("check-grad", "finite-difference gradient check");
  check->add_option("--problem", check_kind, "pca | lrmc | spd")->required();
  add_problem_flags(check, check_spec, check_data);
  check->add_option("--points", points, "random points");
  check->add_option("--directions", directions, "random unit tangents per point");
  check->add_option("--t", t, "difference step");

  rvr::ProblemSpec oracle_spec;
  std::string oracle_kind;
  std::string oracle_data;
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle", "compute the reference solution");
  oracle->add_option("--problem", oracle_kind, "pca | lrmc | spd")->required();
  add_problem_flags(oracle, oracle_spec, oracle_data);
  oracle->add_option("--out", oracle_out, "output JSON")->required();

  std::string sweep_config;
  auto* sweep = app.add_subcommand("sweep", "two-stage step-size / c_beta grid sweep");
  sweep->add_option("--config", sweep_config, "JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_kind, gen_spec, gen_out, gen_csv);
    if (run->parsed()) return cmd_run(run_config, run_out);
    if (check->parsed())
      return cmd_check_grad(finish_spec(check_spec, check_kind, check_data), points, directions, t);
    if (oracle->parsed()) return cmd_oracle(finish_spec(oracle_spec, oracle_kind, oracle_data), oracle_out);
    if (sweep->parsed()) return cmd_sweep(sweep_config);
  } catch (const rvr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const rvr::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const rvr::DegenerateSpectrum& e) {
    std::cerr << "oracle failure: " << e.what() << "\n";
    return kOracleFailure;
  } catch (const rvr::ConvergenceError& e) {
    std::cerr << "oracle failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return kOracleFailure;
  } catch (const rvr::ShapeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kConfigError;
}
