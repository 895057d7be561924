#include "rvr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rvr/rng.hpp"

namespace rvr {

using json = nlohmann::json;

// ---------------------------------------------------------------- config parsing

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

// Numbers, or the strings "inf" / "infinity".
double number_or_inf(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  throw ConfigError(where + " must be a number or \"inf\"");
}

SmoothnessConstants parse_constants(const json& j, const std::string& where) {
  check_keys(j, {"L", "L_l", "theta", "G", "sigma2", "mu", "nu", "tau"}, where);
  SmoothnessConstants c;
  c.L = get_or(j, "L", 0.0, where);
  c.L_l = get_or(j, "L_l", 0.0, where);
  c.theta = get_or(j, "theta", 0.0, where);
  c.G = get_or(j, "G", 0.0, where);
  c.sigma2 = get_or(j, "sigma2", 0.0, where);
  c.mu = get_or(j, "mu", 0.0, where);
  c.nu = get_or(j, "nu", 0.0, where);
  c.tau = get_or(j, "tau", 0.0, where);
  return c;
}

StepSizePolicy parse_step(const json& j, const std::string& where) {
  check_keys(j, {"kind", "eta", "lambda", "alpha", "beta", "period", "epsilon", "n0", "constants"},
             where);
  const auto kind = get_or<std::string>(j, "kind", "fixed", where);
  if (kind == "fixed") return FixedStep{get_or(j, "eta", 1e-3, where)};
  if (kind == "decaying")
    return DecayingStep{get_or(j, "eta", 1e-3, where), get_or(j, "lambda", 0.0, where)};
  if (kind == "spider-adaptive")
    return SpiderAdaptiveStep{get_or(j, "alpha", 1.0, where), get_or(j, "beta", 1e-3, where),
                              get_or<std::size_t>(j, "period", 0, where)};
  if (kind == "spider-theoretical") {
    if (!j.contains("constants")) throw ConfigError(where + ": spider-theoretical needs constants");
    return SpiderTheoreticalStep{get_or(j, "epsilon", 1e-3, where), get_or(j, "n0", 1.0, where),
                                 parse_constants(j.at("constants"), where + ".constants")};
  }
  throw ConfigError(where + ": unknown step kind '" + kind + "'");
}

BatchSchedule parse_batch(const json& j, const std::string& where) {
  check_keys(j, {"kind", "size", "c_beta", "initial", "setting", "epsilon", "alpha2_sigma2", "alpha1"},
             where);
  const auto kind = get_or<std::string>(j, "kind", "fixed", where);
  if (kind == "fixed") return FixedBatch{get_or<std::size_t>(j, "size", 0, where)};
  if (kind != "adaptive") throw ConfigError(where + ": unknown batch kind '" + kind + "'");
  AdaptiveBatch a;
  if (j.contains("c_beta")) a.c_beta = number_or_inf(j.at("c_beta"), where + ".c_beta");
  a.initial = get_or(j, "initial", a.initial, where);
  const auto setting = get_or<std::string>(j, "setting", "finite-sum", where);
  if (setting == "online") {
    a.setting = BatchSetting::Online;
  } else if (setting != "finite-sum") {
    throw ConfigError(where + ": setting must be finite-sum or online");
  }
  a.epsilon = get_or(j, "epsilon", 0.0, where);
  a.alpha2_sigma2 = get_or(j, "alpha2_sigma2", 0.0, where);
  if (j.contains("alpha1")) a.alpha1 = get_or(j, "alpha1", 0.0, where);
  return a;
}

OptimizerEntry parse_optimizer(const json& j, const std::string& where) {
  check_keys(j, {"algorithm", "label", "step", "inner_loop", "minibatch", "epochs", "iterations",
                 "period", "batch", "transport", "retraction", "output", "line_search",
                 "trace_interval", "divergence_factor"},
             where);
  if (!j.contains("algorithm")) throw ConfigError(where + ": algorithm is required");
  OptimizerEntry e;
  OptimizerConfig& c = e.config;
  c.algorithm = parse_algorithm(get_or<std::string>(j, "algorithm", "", where));
  e.label = get_or(j, "label", to_string(c.algorithm), where);
  if (j.contains("step")) c.step = parse_step(j.at("step"), where + ".step");
  c.inner_loop = get_or(j, "inner_loop", c.inner_loop, where);
  c.minibatch = get_or(j, "minibatch", c.minibatch, where);
  c.epochs = get_or(j, "epochs", c.epochs, where);
  c.iterations = get_or(j, "iterations", c.iterations, where);
  c.period = get_or(j, "period", c.period, where);
  if (j.contains("batch")) {
    c.batch = parse_batch(j.at("batch"), where + ".batch");
  } else if (is_adaptive(c.algorithm)) {
    c.batch = AdaptiveBatch{};
  }
  const auto transport = get_or<std::string>(j, "transport", "projection", where);
  if (transport == "parallel") {
    c.transport = TransportKind::Parallel;
  } else if (transport != "projection") {
    throw ConfigError(where + ": transport must be projection or parallel");
  }
  const auto retraction = get_or<std::string>(j, "retraction", "first-order", where);
  if (retraction == "exponential") {
    c.retraction = RetractionMode::Exponential;
  } else if (retraction != "first-order") {
    throw ConfigError(where + ": retraction must be first-order or exponential");
  }
  const auto output = get_or<std::string>(j, "output", "last", where);
  if (output == "uniform") {
    c.output = OutputSelection::UniformRandomIterate;
  } else if (output != "last") {
    throw ConfigError(where + ": output must be last or uniform");
  }
  c.line_search = get_or(j, "line_search", false, where);
  c.trace_interval = get_or(j, "trace_interval", c.trace_interval, where);
  c.divergence_factor = get_or(j, "divergence_factor", c.divergence_factor, where);
  return e;
}

ProblemSpec parse_problem(const json& j) {
  const std::string where = "problem";
  check_keys(j, {"kind", "path", "seed", "n", "d", "r", "cn", "os", "eps", "test_fraction"}, where);
  if (!j.contains("kind")) throw ConfigError("problem.kind is required");
  ProblemSpec p;
  p.kind = parse_dataset_kind(get_or<std::string>(j, "kind", "", where));
  if (j.contains("path")) p.path = get_or<std::string>(j, "path", "", where);
  p.seed = get_or(j, "seed", p.seed, where);
  p.n = get_or(j, "n", p.n, where);
  p.d = get_or(j, "d", p.d, where);
  p.r = get_or(j, "r", p.r, where);
  p.cn = get_or(j, "cn", p.cn, where);
  p.os = get_or(j, "os", p.os, where);
  p.eps = get_or(j, "eps", p.eps, where);
  p.test_fraction = get_or(j, "test_fraction", p.test_fraction, where);
  return p;
}

bool valid_label(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
  });
}

}  // namespace

void ExperimentConfig::validate() const {
  if (optimizers.empty()) throw ConfigError("experiment needs at least one optimizer");
  if (seeds.empty()) throw ConfigError("experiment needs at least one repetition");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("repetition seeds must be distinct");
  std::set<std::string> labels;
  for (const auto& o : optimizers) {
    if (!valid_label(o.label)) throw ConfigError("label '" + o.label + "' is not file-name safe");
    if (!labels.insert(o.label).second) throw ConfigError("duplicate optimizer label '" + o.label + "'");
  }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"problem", "optimizers", "repetitions", "seed", "seeds", "ifo_budget", "oracle",
                 "record_time", "output_dir", "sweep"},
             "config");
  ExperimentConfig c;
  if (!j.contains("problem")) throw ConfigError("config.problem is required");
  c.problem = parse_problem(j.at("problem"));
  if (!j.contains("optimizers") || !j.at("optimizers").is_array())
    throw ConfigError("config.optimizers must be a list");
  for (std::size_t i = 0; i < j.at("optimizers").size(); ++i)
    c.optimizers.push_back(
        parse_optimizer(j.at("optimizers")[i], "optimizers[" + std::to_string(i) + "]"));

  if (j.contains("seeds")) {
    if (j.contains("seed") || j.contains("repetitions"))
      throw ConfigError("give either seeds or seed/repetitions, not both");
    c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {}, "config");
  } else {
    const auto root = get_or<std::uint64_t>(j, "seed", 0, "config");
    const auto reps = get_or<std::size_t>(j, "repetitions", 1, "config");
    for (std::size_t k = 0; k < reps; ++k) c.seeds.push_back(derive_seed(root, Stream::Repetition, k));
  }
  if (j.contains("ifo_budget")) c.ifo_budget = get_or<std::uint64_t>(j, "ifo_budget", 0, "config");
  const auto oracle = get_or<std::string>(j, "oracle", "auto", "config");
  if (oracle == "none") {
    c.oracle = OracleMode::None;
  } else if (oracle != "auto") {
    throw ConfigError("config.oracle must be auto or none");
  }
  c.record_time = get_or(j, "record_time", true, "config");
  if (j.contains("output_dir")) c.output_dir = get_or<std::string>(j, "output_dir", "", "config");
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"eta", "c_beta", "q", "l"}, "sweep");
    c.sweep.eta = get_or<std::vector<double>>(s, "eta", {}, "sweep");
    c.sweep.c_beta = get_or<std::vector<double>>(s, "c_beta", {}, "sweep");
    c.sweep.q = get_or(s, "q", c.sweep.q, "sweep");
    c.sweep.l = get_or(s, "l", c.sweep.l, "sweep");
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_experiment_config(ss.str());
}

// ---------------------------------------------------------------- problems

Dataset make_dataset(const ProblemSpec& spec) {
  if (spec.path) {
    const std::string& path = *spec.path;
    if (spec.kind == DatasetKind::Pca && std::filesystem::path(path).extension() == ".csv")
      return PcaDataset{read_matrix_csv(path), spec.r};
    Dataset data = load_dataset(path);
    if (dataset_kind(data) != spec.kind)
      throw ConfigError("'" + path + "' holds a " + to_string(dataset_kind(data)) + " dataset");
    return data;
  }
  Rng rng(spec.seed, Stream::Dataset);
  switch (spec.kind) {
    case DatasetKind::Pca: return gen_pca(spec.n, spec.d, spec.r, rng);
    case DatasetKind::Lrmc: {
      LrmcOptions o;
      o.n = spec.n;
      o.d = spec.d;
      o.r = spec.r;
      o.cn = spec.cn;
      o.os = spec.os;
      o.eps = spec.eps;
      o.test_fraction = spec.test_fraction;
      return gen_lrmc(o, rng);
    }
    case DatasetKind::Spd: return gen_spd(spec.n, spec.d, spec.cn, rng);
  }
  throw ConfigError("unknown problem kind");
}

LoadedProblem load_problem(const ProblemSpec& spec) {
  LoadedProblem out{nullptr, make_dataset(spec), nullptr};
  if (const auto* p = std::get_if<PcaDataset>(&out.data)) {
    out.problem = pca_problem(std::make_shared<const PcaDataset>(*p));
  } else if (const auto* l = std::get_if<LrmcDataset>(&out.data)) {
    out.lrmc = std::make_shared<const LrmcDataset>(*l);
    out.problem = lrmc_problem(out.lrmc);
  } else {
    out.problem = rkm_problem(std::make_shared<const SpdDataset>(std::get<SpdDataset>(out.data)));
  }
  return out;
}

OracleResult compute_oracle(const LoadedProblem& loaded) {
  if (const auto* p = std::get_if<PcaDataset>(&loaded.data)) return oracle_pca(*p);
  if (loaded.lrmc) return oracle_lrmc(loaded.lrmc);
  return oracle_rkm(std::get<SpdDataset>(loaded.data));
}

// ---------------------------------------------------------------- summaries

SummaryRow summarize(const std::vector<TraceRecord>& trace, bool diverged) {
  SummaryRow row;
  row.diverged = diverged;
  if (trace.empty()) return row;
  const TraceRecord& last = trace.back();
  row.algorithm = last.algorithm;
  row.rep = last.rep;
  row.final_cost = last.cost;
  row.final_grad_norm = last.grad_norm;
  row.final_gap = last.gap;
  row.ifo = last.ifo;
  for (std::size_t g = 0; g < kGapTargets.size(); ++g) {
    for (const auto& r : trace) {
      if (r.gap && *r.gap <= kGapTargets[g]) {
        row.ifo_to_gap[g] = r.ifo;
        break;
      }
    }
  }
  return row;
}

bool ExperimentResult::any_diverged() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.diverged; });
}

std::string trace_file_name(const std::string& label, std::size_t rep) {
  return label + "_rep" + std::to_string(rep) + ".csv";
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << "algorithm,rep,status,final_cost,final_grad_norm,final_gap,ifo";
  for (int e = 2; e <= 8; ++e) os << ",ifo_to_gap_1e-" << e;
  os << '\n';
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.rep << ',' << (r.diverged ? "diverged" : "ok") << ','
       << format_double(r.final_cost) << ',' << format_double(r.final_grad_norm) << ','
       << (r.final_gap ? format_double(*r.final_gap) : "") << ',' << r.ifo;
    for (const auto& v : r.ifo_to_gap) os << ',' << (v ? std::to_string(*v) : "");
    os << '\n';
  }
  if (!os) throw ConfigError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------- running

namespace {

struct Context {
  LoadedProblem loaded;
  std::optional<OracleResult> oracle;
};

Context prepare(const ExperimentConfig& config) {
  Context ctx{load_problem(config.problem), std::nullopt};
  if (config.oracle == OracleMode::Auto) {
    const bool lrmc_without_truth = ctx.loaded.lrmc && !ctx.loaded.lrmc->truth_basis;
    if (!lrmc_without_truth) ctx.oracle = compute_oracle(ctx.loaded);
  }
  return ctx;
}

RunRecord run_one(const Context& ctx, const ExperimentConfig& config, const OptimizerEntry& entry,
                  std::size_t rep) {
  OptimizerConfig c = entry.config;
  c.seed = config.seeds.at(rep);
  c.record_time = config.record_time;
  if (config.ifo_budget) c.ifo_budget = config.ifo_budget;
  RunOptions options;
  options.label = entry.label;
  options.repetition = rep;
  // Gaps are only reported against a certified oracle.
  if (ctx.oracle && certified(*ctx.oracle)) options.optimal_cost = ctx.oracle->cost;
  if (ctx.loaded.lrmc && !ctx.loaded.lrmc->test.empty()) {
    auto data = ctx.loaded.lrmc;
    options.test_metric = [data](const ManifoldPoint& x) { return test_mse(*data, x); };
  }
  RunRecord rec;
  rec.label = entry.label;
  rec.rep = rep;
  try {
    RunResult result = run_optimizer(*ctx.loaded.problem, c, options);
    rec.trace = std::move(result.trace);
    rec.output = result.output;
  } catch (const DivergenceError& e) {
    rec.trace = e.partial().trace;
    rec.diverged = true;
    rec.message = e.what();
  } catch (const NumericalError& e) {
    rec.diverged = true;
    rec.message = e.what();
  }
  return rec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::string>& out_dir) {
  config.validate();
  const Context ctx = prepare(config);
  ExperimentResult result;
  result.oracle = ctx.oracle;
  for (const auto& entry : config.optimizers)
    for (std::size_t rep = 0; rep < config.seeds.size(); ++rep)
      result.runs.push_back(run_one(ctx, config, entry, rep));
  for (const auto& run : result.runs) {
    SummaryRow row = summarize(run.trace, run.diverged);
    row.algorithm = run.label;
    row.rep = run.rep;
    result.summary.push_back(std::move(row));
  }
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    const std::filesystem::path dir(*out_dir);
    for (const auto& run : result.runs)
      write_trace_csv((dir / trace_file_name(run.label, run.rep)).string(), run.trace);
    write_summary_csv((dir / "summary.csv").string(), result.summary);
    const std::string script = emit_plot_data(result.runs, (dir / "plot_data.csv").string());
    std::ofstream gp(dir / "plot.gp");
    gp << script;
    if (!gp) throw ConfigError("failed writing plot.gp");
  }
  return result;
}

// ---------------------------------------------------------------- sweep

std::vector<double> default_eta_grid(int q) {
  std::vector<double> g;
  for (int k = 1; k <= 9; ++k) g.push_back(k * std::pow(10.0, q));
  return g;
}

std::vector<double> default_c_beta_grid(int l) {
  std::vector<double> g;
  for (int k = 1; k <= 15; k += 2) g.push_back(k * std::pow(10.0, l));
  return g;
}

namespace {

bool set_eta(OptimizerConfig& c, double eta) {
  if (auto* f = std::get_if<FixedStep>(&c.step)) {
    f->eta = eta;
  } else if (auto* d = std::get_if<DecayingStep>(&c.step)) {
    d->eta = eta;
  } else if (auto* s = std::get_if<SpiderAdaptiveStep>(&c.step)) {
    s->beta = eta;
  } else {
    return false;
  }
  return true;
}

std::optional<Algorithm> vanilla_of(Algorithm a) {
  switch (a) {
    case Algorithm::RAbaSVRG: return Algorithm::RSVRG;
    case Algorithm::RAbaSRG: return Algorithm::RSRG;
    case Algorithm::RAbaSPIDER: return Algorithm::RSPIDER;
    default: return std::nullopt;
  }
}

double score(const RunRecord& run) {
  if (run.diverged || run.trace.empty()) return std::numeric_limits<double>::infinity();
  const TraceRecord& last = run.trace.back();
  const double v = last.gap ? *last.gap : last.cost;
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

// Ascending grid, strict improvement: ties keep the smaller value.
template <class Apply>
double best_over(const Context& ctx, const ExperimentConfig& config, const OptimizerEntry& base,
                 std::vector<double> grid, Apply&& apply, std::vector<SweepPoint>& log) {
  std::sort(grid.begin(), grid.end());
  double best_value = grid.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (double v : grid) {
    OptimizerEntry e = base;
    apply(e.config, v);
    const double s = score(run_one(ctx, config, e, 0));
    log.push_back({base.label, v, s});
    if (s < best_score) {
      best_score = s;
      best_value = v;
    }
  }
  return best_value;
}

}  // namespace

SweepResult grid_sweep(const ExperimentConfig& config, std::vector<double> eta_grid,
                       std::vector<double> c_beta_grid) {
  config.validate();
  if (eta_grid.empty() || c_beta_grid.empty()) throw ConfigError("sweep grids must not be empty");
  const Context ctx = prepare(config);
  SweepResult out;
  out.best = config.optimizers;
  std::vector<std::optional<double>> tuned_eta(config.optimizers.size());

  for (std::size_t i = 0; i < out.best.size(); ++i) {
    OptimizerEntry& e = out.best[i];
    if (is_adaptive(e.config.algorithm)) continue;
    OptimizerConfig probe = e.config;
    if (!set_eta(probe, 1.0)) continue;
    const double eta = best_over(ctx, config, e, eta_grid,
                                 [](OptimizerConfig& c, double v) { set_eta(c, v); }, out.evaluations);
    set_eta(e.config, eta);
    tuned_eta[i] = eta;
  }

  for (auto& e : out.best) {
    if (!is_adaptive(e.config.algorithm)) continue;
    const auto vanilla = vanilla_of(e.config.algorithm);
    for (std::size_t j = 0; j < out.best.size(); ++j) {
      if (out.best[j].config.algorithm == vanilla && tuned_eta[j]) {
        set_eta(e.config, *tuned_eta[j]);
        break;
      }
    }
    const double c_beta = best_over(
        ctx, config, e, c_beta_grid,
        [](OptimizerConfig& c, double v) {
          auto& a = std::get<AdaptiveBatch>(c.batch);
          a.c_beta = v;
          a.alpha1.reset();
        },
        out.evaluations);
    auto& a = std::get<AdaptiveBatch>(e.config.batch);
    a.c_beta = c_beta;
    a.alpha1.reset();
  }
  return out;
}

// ---------------------------------------------------------------- plot data

void write_plot_data(std::ostream& os, const std::vector<RunRecord>& runs) {
  os << kPlotHeader << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& run : runs) {
    for (const auto& r : run.trace) {
      os << r.algorithm << ',' << r.rep << ',' << r.ifo << ',' << r.epoch << ',' << r.step << ','
         << opt(r.wall_ms) << ',' << format_double(r.cost) << ',' << format_double(r.grad_norm)
         << ',' << opt(r.gap) << ',' << opt(r.test_mse) << ',' << r.batch_size << ','
         << format_double(r.step_size) << '\n';
    }
  }
}

std::string emit_plot_data(const std::vector<RunRecord>& runs, const std::string& csv_path) {
  {
    std::ofstream os(csv_path);
    if (!os) throw ConfigError("cannot open '" + csv_path + "' for writing");
    write_plot_data(os, runs);
    if (!os) throw ConfigError("failed writing '" + csv_path + "'");
  }
  std::set<std::string> labels;
  for (const auto& run : runs) labels.insert(run.label);
  const std::string file = std::filesystem::path(csv_path).filename().string();

  std::ostringstream gp;
  gp << "# columns: " << kPlotHeader << "\n"
     << "# gap (9) and grad_norm (8) are meant for log scale\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel 'IFO'\n"
     << "set logscale y\n"
     << "set format y '%.0e'\n";
  auto plot = [&](int column, const char* name, const char* out) {
    gp << "set terminal pngcairo size 900,600\n"
       << "set output '" << out << "'\n"
       << "set ylabel '" << name << "'\n"
       << "plot ";
    bool first = true;
    for (const auto& label : labels) {
      gp << (first ? "" : ", \\\n     ") << "'" << file << "' using "
         << "(strcol(1) eq '" << label << "' && $2 == 0 ? $3 : 1/0):" << column
         << " with lines title '" << label << "'";
      first = false;
    }
    if (labels.empty()) gp << "NaN notitle";
    gp << "\n";
  };
  plot(9, "optimality gap", "gap_vs_ifo.png");
  plot(8, "gradient norm", "grad_norm_vs_ifo.png");
  return gp.str();
}

}  // namespace rvr
