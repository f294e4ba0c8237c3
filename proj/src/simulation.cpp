#include "moe/simulation.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "moe/baselines.hpp"
#include "moe/spectra.hpp"

#include "kernels.hpp"

namespace moe {
namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

bool wants_large(std::span<const Method> methods) {
  return std::any_of(methods.begin(), methods.end(),
                     [](Method m) { return m == Method::Large || m == Method::LargePf; });
}

// What a trial leaves behind for aggregation: the trace (re-scanned per rho)
// and the rho-independent baseline ranks.
struct TrialRecord {
  PesdrTrace trace;
  TrialResult baseline_ranks;
};

TrialRecord record_from_spectra(const ModeSpectra& spectra, std::span<const std::size_t> dims,
                                std::span<const Method> methods, double epsilon) {
  const GlobalEigenvalueProfile profile = global_eigenvalues(spectra);
  TrialRecord rec;
  if (wants_large(methods)) rec.trace = pesdr_trace(profile, LargeConfig{kDefaultRho, epsilon, false});
  for (Method m : methods) {
    switch (m) {
      case Method::Large:
      case Method::LargePf:
        break;
      case Method::Aic:
        rec.baseline_ranks[m] = classical_moe(spectra, dims, InformationCriterion::Aic).rank;
        break;
      case Method::Mdl:
        rec.baseline_ranks[m] = classical_moe(spectra, dims, InformationCriterion::Mdl).rank;
        break;
      case Method::NdAic:
        rec.baseline_ranks[m] = nd_moe(profile, dims, InformationCriterion::Aic).rank;
        break;
      case Method::NdMdl:
        rec.baseline_ranks[m] = nd_moe(profile, dims, InformationCriterion::Mdl).rank;
        break;
    }
  }
  return rec;
}

TrialRecord record_trial(const DenseTensor& observed, std::span<const Method> methods, double epsilon) {
  return record_from_spectra(unit_norm_spectra(observed), observed.dims(), methods, epsilon);
}

// Mode Gram matrices of S + alpha * N for any alpha, from
// G(alpha) = G_SS + alpha (G_SN + G_SN^T) + alpha^2 G_NN. The signal terms come
// from the CP factors, so only G_NN needs a pass over the tensor.
class SnrSweep {
 public:
  explicit SnrSweep(const PlantedTrial& trial) : trial_(trial) {
    const auto dims = trial.signal.dims();
    const std::vector<Matrix>& f = trial.factors.factors;
    const std::size_t order = dims.size();
    const auto rank = static_cast<Eigen::Index>(trial.factors.rank());
    for (std::size_t d = 0; d < order; ++d)
      if (!detail::row_gram(dims, d)) return;

    terms_.reserve(order);
    for (std::size_t d = 0; d < order; ++d) {
      Matrix had = Matrix::Ones(rank, rank);
      for (std::size_t e = 0; e < order; ++e)
        if (e != d) had.array() *= (f[e].transpose() * f[e]).array();
      const Matrix m = detail::mttkrp(trial.raw_noise, f, d);
      if (d == 0) signal_noise_ = (f[0].array() * m.array()).sum();
      const Matrix cross = f[d] * m.transpose();
      terms_.push_back({f[d] * had * f[d].transpose(), cross + cross.transpose(),
                        detail::mode_gram(trial.raw_noise, d)});
    }
  }

  [[nodiscard]] ModeSpectra unit_spectra(double snr_db) const {
    if (terms_.empty()) return unit_norm_spectra(trial_.noisy_at(snr_db));
    const double alpha = noise_scale(trial_.signal_norm, trial_.raw_noise_norm, snr_db);
    const double norm2 = trial_.signal_norm * trial_.signal_norm + 2.0 * alpha * signal_noise_ +
                         alpha * alpha * trial_.raw_noise_norm * trial_.raw_noise_norm;
    if (!(norm2 > 0.0)) throw std::domain_error("global eigenvalues of a zero tensor are undefined");
    ModeSpectra out;
    out.per_mode.reserve(terms_.size());
    for (const Terms& t : terms_) {
      const Matrix g = t.signal + alpha * t.cross + (alpha * alpha) * t.noise;
      out.per_mode.push_back(detail::singular_values_from_gram(g, 1.0 / norm2));
    }
    return out;
  }

 private:
  struct Terms {
    Matrix signal;
    Matrix cross;
    Matrix noise;  // lower triangle only
  };
  const PlantedTrial& trial_;
  std::vector<Terms> terms_;
  double signal_noise_ = 0.0;
};

std::size_t rank_from_record(const TrialRecord& rec, Method m, double rho, double epsilon) {
  if (m == Method::Large || m == Method::LargePf)
    return large_rank(rec.trace, LargeConfig{rho, epsilon, m == Method::LargePf});
  return rec.baseline_ranks.at(m);
}

void tally(MonteCarloRow& row, std::size_t estimate, std::size_t planted) {
  if (estimate > planted)
    ++row.n_fp;
  else if (estimate < planted)
    ++row.n_fn;
  else
    ++row.n_correct;
}

void finish(MonteCarloRow& row) {
  const auto n = static_cast<double>(row.trials);
  row.p_fp = static_cast<double>(row.n_fp) / n;
  row.p_fn = static_cast<double>(row.n_fn) / n;
  row.pod = static_cast<double>(row.n_correct) / n;
}

void require_grid(std::span<const double> grid, const char* name) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (double v : grid)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " grid contains a non-finite value");
}

}  // namespace

void ScenarioConfig::validate_model() const {
  if (dims.size() < 2) throw std::invalid_argument("scenario needs at least two dimensions");
  for (std::size_t m : dims)
    if (m < 1) throw std::invalid_argument("scenario dimensions must be positive");
  const std::size_t smallest = *std::min_element(dims.begin(), dims.end());
  if (rank < 1) throw std::invalid_argument("scenario rank must be at least 1");
  if (rank >= smallest) throw std::invalid_argument("scenario rank must be below the smallest dimension");
  if (!correlation.empty() && correlation.size() != dims.size())
    throw std::invalid_argument("correlation vector needs one entry per mode");
  for (double r : correlation)
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("correlation entries must lie in [0, 1)");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite");
}

void ScenarioConfig::validate() const {
  validate_model();
  const std::size_t smallest = *std::min_element(dims.begin(), dims.end());
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (methods.empty()) throw std::invalid_argument("no estimation methods requested");
  LargeConfig{rho, epsilon, false}.validate();
  if (wants_large(methods) && smallest < 4) throw std::invalid_argument("LaRGE needs every dimension to be at least 4");
}

std::vector<double> ScenarioConfig::correlation_or_zero() const {
  return correlation.empty() ? std::vector<double>(dims.size(), 0.0) : correlation;
}

Matrix equicorrelation(std::size_t rank, double r) {
  const auto n = static_cast<Eigen::Index>(rank);
  Matrix c = Matrix::Constant(n, n, r);
  c.diagonal().setOnes();
  return c;
}

FactorSet gen_correlated_factors(std::span<const std::size_t> dims, std::size_t rank,
                                 std::span<const double> correlation, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("need at least two modes");
  if (rank < 1) throw std::invalid_argument("rank must be at least 1");
  if (correlation.size() != dims.size()) throw std::invalid_argument("correlation vector needs one entry per mode");
  for (double r : correlation)
    if (!(r >= 0.0 && r < 1.0))
      throw std::invalid_argument("correlation " + std::to_string(r) + " outside [0, 1): not positive definite");

  const auto n_cols = static_cast<Eigen::Index>(rank);
  std::normal_distribution<double> normal(0.0, 1.0);
  FactorSet out;
  out.factors.reserve(dims.size());
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const auto rows = static_cast<Eigen::Index>(dims[d]);
    Matrix g(rows, n_cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index r = 0; r < n_cols; ++r) g(i, r) = normal(rng);
    if (correlation[d] == 0.0) {
      out.factors.push_back(std::move(g));
      continue;
    }
    Eigen::LLT<Matrix> chol(equicorrelation(rank, correlation[d]));
    if (chol.info() != Eigen::Success) throw std::invalid_argument("correlation matrix is not positive definite");
    out.factors.push_back(g * chol.matrixL().transpose());
  }
  return out;
}

DenseTensor PlantedTrial::noisy_at(double snr_db) const {
  const double alpha = noise_scale(signal_norm, raw_noise_norm, snr_db);
  DenseTensor out = signal;
  auto y = out.data();
  const auto n = raw_noise.data();
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += alpha * n[k];
  return out;
}

PlantedTrial plant_trial(const ScenarioConfig& cfg, std::size_t trial_index) {
  Rng rng(derive_seed(cfg.master_seed, trial_index));
  const std::vector<double> corr = cfg.correlation_or_zero();
  FactorSet factors = gen_correlated_factors(cfg.dims, cfg.rank, corr, rng);
  PlantedTrial trial{factors, cp_construct(factors), DenseTensor(cfg.dims)};
  fill_standard_normal(trial.raw_noise.data(), rng);
  trial.signal_norm = frobenius_norm(trial.signal);
  trial.raw_noise_norm = frobenius_norm(trial.raw_noise);
  if (!(trial.signal_norm > 0.0)) throw std::domain_error("planted signal has zero norm");
  return trial;
}

TrialResult estimate_all(const DenseTensor& observed, std::span<const Method> methods, double rho, double epsilon) {
  const TrialRecord rec = record_trial(observed, methods, epsilon);
  TrialResult out;
  for (Method m : methods) out[m] = rank_from_record(rec, m, rho, epsilon);
  return out;
}

TrialResult run_trial(const ScenarioConfig& cfg, std::size_t trial_index) {
  cfg.validate();
  const PlantedTrial trial = plant_trial(cfg, trial_index);
  return estimate_all(trial.noisy_at(cfg.snr_db), cfg.methods, cfg.rho, cfg.epsilon);
}

const MonteCarloRow* MonteCarloReport::find(Method method, double grid_value) const {
  for (const MonteCarloRow& row : rows)
    if (row.method == method && row.grid_value == grid_value) return &row;
  return nullptr;
}

MonteCarloReport calibrate_threshold(const ScenarioConfig& cfg, std::span<const double> rho_grid,
                                     const RunOptions& run) {
  cfg.validate();
  require_grid(rho_grid, "rho");
  for (double rho : rho_grid)
    if (!(rho > 0.0)) throw std::invalid_argument("rho grid values must be positive");

  std::vector<TrialRecord> records(cfg.trials);
  parallel_for(cfg.trials, run.threads, [&](std::size_t k) {
    const PlantedTrial trial = plant_trial(cfg, k);
    records[k] = record_trial(trial.noisy_at(cfg.snr_db), cfg.methods, cfg.epsilon);
  });

  MonteCarloReport report;
  report.kind = "calibration";
  report.trials = cfg.trials;
  report.master_seed = cfg.master_seed;
  report.scenario = cfg;
  report.scenario.rho_grid.assign(rho_grid.begin(), rho_grid.end());
  for (Method m : cfg.methods) {
    for (double rho : rho_grid) {
      MonteCarloRow row{m, rho, cfg.trials};
      for (const TrialRecord& rec : records) tally(row, rank_from_record(rec, m, rho, cfg.epsilon), cfg.rank);
      finish(row);
      report.rows.push_back(row);
    }
  }
  return report;
}

MonteCarloReport pod_vs_snr(const ScenarioConfig& cfg, std::span<const double> snr_grid, const RunOptions& run) {
  cfg.validate();
  require_grid(snr_grid, "snr");

  // ranks[trial][grid point] in cfg.methods order.
  std::vector<std::vector<std::vector<std::size_t>>> ranks(cfg.trials);
  parallel_for(cfg.trials, run.threads, [&](std::size_t k) {
    const PlantedTrial trial = plant_trial(cfg, k);
    const SnrSweep sweep(trial);
    auto& per_grid = ranks[k];
    per_grid.reserve(snr_grid.size());
    for (double snr : snr_grid) {
      const TrialRecord rec = record_from_spectra(sweep.unit_spectra(snr), cfg.dims, cfg.methods, cfg.epsilon);
      std::vector<std::size_t> row;
      row.reserve(cfg.methods.size());
      for (Method m : cfg.methods) row.push_back(rank_from_record(rec, m, cfg.rho, cfg.epsilon));
      per_grid.push_back(std::move(row));
    }
  });

  MonteCarloReport report;
  report.kind = "pod_vs_snr";
  report.trials = cfg.trials;
  report.master_seed = cfg.master_seed;
  report.scenario = cfg;
  report.scenario.snr_grid.assign(snr_grid.begin(), snr_grid.end());
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (std::size_t g = 0; g < snr_grid.size(); ++g) {
      MonteCarloRow row{cfg.methods[mi], snr_grid[g], cfg.trials};
      for (const auto& per_grid : ranks) tally(row, per_grid[g][mi], cfg.rank);
      finish(row);
      report.rows.push_back(row);
    }
  }
  return report;
}

std::size_t resolve_threads(std::size_t requested) {
  if (const char* env = std::getenv("MOE_THREADS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, requested);
}

}  // namespace moe
