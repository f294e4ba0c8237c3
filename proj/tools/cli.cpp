#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "moe/baselines.hpp"
#include "moe/cp_als.hpp"
#include "moe/error.hpp"
#include "moe/estimators.hpp"
#include "moe/io.hpp"
#include "moe/simulation.hpp"
#include "moe/spectra.hpp"

#ifndef MOE_VERSION
#define MOE_VERSION "0.0.0"
#endif

namespace moe::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<Method> kBenchmarkMethods{Method::Large, Method::LargePf, Method::NdAic, Method::NdMdl};

// Options shared by the subcommands; not every command reads every field.
struct Options {
  std::string input;
  std::string output;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> methods;
  std::optional<double> rho;
  std::optional<double> epsilon;
  bool pf = false;
  std::vector<double> rho_grid;
  std::vector<double> snr_grid;
  std::size_t trial = 0;
  std::optional<std::size_t> rank;
  bool auto_rank = false;
  std::size_t max_iters = CpOptions{}.max_iters;
  double tol = CpOptions{}.tol;
};

class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> args, fs::path dir)
      : command_(std::move(command)), args_(std::move(args)), dir_(std::move(dir)),
        start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }

  void write(const json& config, std::optional<std::uint64_t> seed) const {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m{{"command", command_},  {"args", args_},
           {"config", config},     {"version", MOE_VERSION},
           {"seed", nullptr},      {"duration_seconds", seconds},
           {"outputs", outputs_}};
    if (seed) m["seed"] = *seed;
    std::ofstream out(dir_ / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + (dir_ / "manifest.json").string());
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  body(out);
  if (!out) throw std::runtime_error("failed writing " + p.string());
}

void write_json(const fs::path& p, const json& j) {
  write_file(p, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

// Scenario plus the raw JSON, so commands can tell which fields were given.
struct Scenario {
  json raw;
  ScenarioConfig cfg;
};

Scenario read_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path);
  Scenario s;
  try {
    in >> s.raw;
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + path + " is not valid JSON: " + e.what());
  }
  s.cfg = scenario_from_json(s.raw);
  return s;
}

std::vector<Method> parse_methods(const std::vector<std::string>& tags) {
  std::vector<Method> out;
  for (const std::string& tag : tags) {
    const auto m = parse_method(tag);
    if (!m) throw ConfigError("unknown method '" + tag + "'");
    out.push_back(*m);
  }
  return out;
}

void apply_overrides(ScenarioConfig& cfg, const Options& o) {
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.rho) cfg.rho = *o.rho;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (!o.methods.empty()) cfg.methods = parse_methods(o.methods);
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
}

fs::path out_dir_or(const Options& o, const fs::path& fallback) {
  return o.out_dir.empty() ? fallback : fs::path(o.out_dir);
}

bool is_large(Method m) { return m == Method::Large || m == Method::LargePf; }

void require_large_feasible(const DenseTensor& t) {
  const std::size_t m = *std::min_element(t.dims().begin(), t.dims().end());
  if (m < 4)
    throw InfeasibleError("LaRGE needs at least 4 global eigenvalues; the smallest dimension is " + std::to_string(m));
}

LargeConfig large_config(const Options& o, bool pf) {
  LargeConfig cfg{o.rho.value_or(kDefaultRho), o.epsilon.value_or(kDefaultEpsilon), pf};
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

int cmd_synth(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  Scenario s = read_scenario(o.input);
  if (o.seed) s.cfg.master_seed = *o.seed;
  const fs::path target(o.output);
  const fs::path dir = out_dir_or(o, target.has_parent_path() ? target.parent_path() : fs::path("."));
  Manifest manifest("synth", args, dir);

  const PlantedTrial trial = plant_trial(s.cfg, o.trial);
  const DenseTensor x = trial.noisy_at(s.cfg.snr_db);
  double noise2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x.data()[k] - trial.signal.data()[k];
    noise2 += d * d;
  }
  const double realized = 10.0 * std::log10(trial.signal_norm * trial.signal_norm / noise2);

  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  write_tnsr(target, x);
  fs::path sidecar = target;
  sidecar.replace_extension(".json");
  const json meta{{"dims", s.cfg.dims},
                  {"planted_rank", s.cfg.rank},
                  {"snr_db", s.cfg.snr_db},
                  {"realized_snr_db", realized},
                  {"correlation", s.cfg.correlation_or_zero()},
                  {"seed", s.cfg.master_seed},
                  {"trial", o.trial}};
  write_json(sidecar, meta);
  manifest.path(fs::relative(target, dir).string());
  manifest.path(fs::relative(sidecar, dir).string());
  manifest.write({{"scenario", to_json(s.cfg)}, {"trial", o.trial}, {"output", o.output}}, s.cfg.master_seed);
  out << meta.dump() << '\n';
  return kExitOk;
}

int cmd_spectra(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const DenseTensor t = read_tnsr(fs::path(o.input));
  Manifest manifest("spectra", args, out_dir_or(o, "."));
  const GlobalEigenvalueProfile p = global_eigenvalues(t);
  write_file(manifest.path("spectra.csv"), [&](std::ostream& f) { write_spectra_csv(f, p); });
  manifest.write({{"input", o.input}}, std::nullopt);
  out << "wrote " << p.size() << " global eigenvalues\n";
  return kExitOk;
}

int cmd_estimate(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  if (o.methods.size() > 1) throw ConfigError("estimate takes a single --method");
  Method method = o.methods.empty() ? Method::Large : parse_methods(o.methods).front();
  if (o.pf) {
    if (!is_large(method)) throw ConfigError("--pf applies to the LaRGE method only");
    method = Method::LargePf;
  }
  const LargeConfig cfg = large_config(o, method == Method::LargePf);
  const DenseTensor t = read_tnsr(fs::path(o.input));
  Manifest manifest("estimate", args, out_dir_or(o, "."));

  RankEstimate est;
  switch (method) {
    case Method::Large:
    case Method::LargePf:
      require_large_feasible(t);
      est = estimate_large(global_eigenvalues(t), cfg);
      write_file(manifest.path("trace.csv"), [&](std::ostream& f) { write_trace_csv(f, est.trace); });
      break;
    case Method::Aic:
    case Method::Mdl:
      est = classical_moe(t, method == Method::Aic ? InformationCriterion::Aic : InformationCriterion::Mdl);
      break;
    case Method::NdAic:
    case Method::NdMdl:
      est = nd_moe(global_eigenvalues(t), t.dims(),
                   method == Method::NdAic ? InformationCriterion::Aic : InformationCriterion::Mdl);
      break;
  }
  if (!is_large(method))
    write_file(manifest.path("criterion.csv"), [&](std::ostream& f) { write_criterion_csv(f, est.criterion); });
  const json summary = summary_json(est, cfg);
  write_json(manifest.path("summary.json"), summary);
  manifest.write({{"input", o.input}, {"method", std::string(to_string(method))}, {"rho", cfg.rho},
                  {"epsilon", cfg.epsilon}},
                 std::nullopt);
  out << summary.dump() << '\n';
  return kExitOk;
}

void write_report(Manifest& manifest, const std::string& stem, const MonteCarloReport& report) {
  write_file(manifest.path(stem + ".csv"), [&](std::ostream& f) { write_report_csv(f, report); });
  write_json(manifest.path(stem + ".json"), to_json(report));
}

std::vector<double> default_rho_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 21; ++k) grid.push_back(k / 10.0);
  return grid;
}

int cmd_calibrate(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  Scenario s = read_scenario(o.input);
  if (!s.raw.contains("trials")) s.cfg.trials = kDefaultCalibrationTrials;
  apply_overrides(s.cfg, o);
  std::vector<double> grid = !o.rho_grid.empty() ? o.rho_grid : s.cfg.rho_grid;
  if (grid.empty()) grid = default_rho_grid();
  Manifest manifest("calibrate", args, out_dir_or(o, "."));
  MonteCarloReport report;
  try {
    report = calibrate_threshold(s.cfg, grid, {resolve_threads(o.threads)});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_report(manifest, "calibration", report);
  manifest.write(to_json(report.scenario), s.cfg.master_seed);
  out << "calibration: " << report.rows.size() << " rows, " << report.trials << " trials\n";
  return kExitOk;
}

int cmd_benchmark(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  Scenario s = read_scenario(o.input);
  if (!s.raw.contains("trials")) s.cfg.trials = kDefaultBenchmarkTrials;
  if (!s.raw.contains("methods")) s.cfg.methods = kBenchmarkMethods;
  apply_overrides(s.cfg, o);
  std::vector<double> grid = !o.snr_grid.empty() ? o.snr_grid : s.cfg.snr_grid;
  if (grid.empty()) grid = {s.cfg.snr_db};
  Manifest manifest("benchmark", args, out_dir_or(o, "."));
  MonteCarloReport report;
  try {
    report = pod_vs_snr(s.cfg, grid, {resolve_threads(o.threads)});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_report(manifest, "pod_vs_snr", report);
  manifest.write(to_json(report.scenario), s.cfg.master_seed);
  out << "pod_vs_snr: " << report.rows.size() << " rows, " << report.trials << " trials\n";
  return kExitOk;
}

int cmd_decompose(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const DenseTensor t = read_tnsr(fs::path(o.input));
  const LargeConfig lcfg = large_config(o, o.pf);
  Manifest manifest("decompose", args, out_dir_or(o, "."));

  json config{{"input", o.input}, {"max_iters", o.max_iters}, {"tol", o.tol}, {"seed", o.seed.value_or(0)}};
  json summary;
  std::size_t rank = 0;
  if (o.auto_rank) {
    require_large_feasible(t);
    const RankEstimate est = estimate_large(global_eigenvalues(t), lcfg);
    rank = est.rank;
    summary["estimate"] = summary_json(est, lcfg);
    config["auto"] = true;
    config["rho"] = lcfg.rho;
    config["epsilon"] = lcfg.epsilon;
    config["pf"] = o.pf;
  } else {
    rank = *o.rank;
    config["rank"] = rank;
  }
  if (!(o.tol >= 0.0)) throw ConfigError("--tol must be non-negative");
  if (o.max_iters < 1) throw ConfigError("--max-iters must be at least 1");

  const CpResult r = cp_als(t, rank, CpOptions{o.max_iters, o.tol, o.seed.value_or(0)});
  for (std::size_t d = 0; d < r.factors.order(); ++d) {
    const std::string name = "factor_mode" + std::to_string(d + 1) + ".csv";
    write_file(manifest.path(name), [&](std::ostream& f) { write_matrix_csv(f, r.factors.factors[d]); });
  }
  write_file(manifest.path("loadings.csv"), [&](std::ostream& f) {
    f << "component,loading\n";
    for (std::size_t k = 0; k < r.loadings.size(); ++k) f << (k + 1) << ',' << format_double(r.loadings[k]) << '\n';
  });
  summary["rank"] = rank;
  summary["rank_source"] = o.auto_rank ? "auto" : "fixed";
  summary["relative_fit"] = r.relative_fit;
  summary["iterations"] = r.iterations;
  summary["converged"] = r.converged;
  summary["regularized"] = r.regularized;
  summary["loadings"] = r.loadings;
  write_json(manifest.path("decompose.json"), summary);
  manifest.write(config, o.seed);
  out << summary.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model order estimation for noisy low-rank tensors", "moe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MOE_VERSION);
  Options o;

  auto add_out_dir = [&](CLI::App* c) { c->add_option("--out-dir", o.out_dir, "Directory for outputs and manifest"); };
  auto add_large = [&](CLI::App* c) {
    c->add_option("--rho", o.rho, "LaRGE threshold (default 0.57)");
    c->add_option("--epsilon", o.epsilon, "Residual std floor (default 1.2e-3)");
    c->add_flag("--pf", o.pf, "Use the penalized statistic");
  };
  auto add_run = [&](CLI::App* c) {
    c->add_option("scenario", o.input, "Scenario JSON")->required();
    c->add_option("--seed", o.seed, "Master seed (overrides the scenario)");
    c->add_option("--trials", o.trials, "Monte-Carlo trials (overrides the scenario)");
    c->add_option("--threads", o.threads, "Worker threads (MOE_THREADS overrides)");
    c->add_option("--method", o.methods, "Estimators to run (repeatable)");
    c->add_option("--rho", o.rho, "LaRGE threshold");
    c->add_option("--epsilon", o.epsilon, "Residual std floor");
    add_out_dir(c);
  };

  CLI::App* synth = app.add_subcommand("synth", "Draw one noisy tensor from a scenario");
  synth->add_option("scenario", o.input, "Scenario JSON")->required();
  synth->add_option("output", o.output, "Output TNSR file")->required();
  synth->add_option("--seed", o.seed, "Master seed (overrides the scenario)");
  synth->add_option("--trial", o.trial, "Trial index within the scenario stream");
  add_out_dir(synth);

  CLI::App* spectra = app.add_subcommand("spectra", "Write the global eigenvalue profile as CSV");
  spectra->add_option("input", o.input, "TNSR file")->required();
  add_out_dir(spectra);

  CLI::App* estimate = app.add_subcommand("estimate", "Estimate the model order of a tensor");
  estimate->add_option("input", o.input, "TNSR file")->required();
  estimate->add_option("--method", o.methods, "large | large-pf | aic | mdl | nd-aic | nd-mdl");
  add_large(estimate);
  add_out_dir(estimate);

  CLI::App* calibrate = app.add_subcommand("calibrate", "Pfp/Pfn/PoD against the LaRGE threshold");
  add_run(calibrate);
  calibrate->add_option("--rho-grid", o.rho_grid, "Threshold grid")->delimiter(',');

  CLI::App* benchmark = app.add_subcommand("benchmark", "PoD against SNR for several estimators");
  add_run(benchmark);
  benchmark->add_option("--snr-grid", o.snr_grid, "SNR grid in dB")->delimiter(',');

  CLI::App* decompose = app.add_subcommand("decompose", "CP decomposition by alternating least squares");
  decompose->add_option("input", o.input, "TNSR file")->required();
  auto* rank_opt = decompose->add_option("--rank", o.rank, "Number of components");
  auto* auto_opt = decompose->add_flag("--auto", o.auto_rank, "Take the rank from LaRGE");
  rank_opt->excludes(auto_opt);
  decompose->add_option("--max-iters", o.max_iters, "ALS iteration limit");
  decompose->add_option("--tol", o.tol, "Stop when the fit improves by less than this");
  decompose->add_option("--seed", o.seed, "Seed for the random initialization fallback");
  add_large(decompose);
  add_out_dir(decompose);

  std::vector<std::string> argv_storage{"moe"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*decompose && !o.rank && !o.auto_rank) throw ConfigError("decompose needs --rank or --auto");
    if (*synth) return cmd_synth(o, args, out);
    if (*spectra) return cmd_spectra(o, args, out);
    if (*estimate) return cmd_estimate(o, args, out);
    if (*calibrate) return cmd_calibrate(o, args, out);
    if (*benchmark) return cmd_benchmark(o, args, out);
    if (*decompose) return cmd_decompose(o, args, out);
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const std::domain_error& e) {
    err << "error: unusable input: " << e.what() << '\n';
    return kExitFormat;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace moe::cli
