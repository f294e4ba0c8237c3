#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "moe/estimators.hpp"
#include "moe/rng.hpp"
#include "moe/tensor.hpp"

namespace moe {

inline constexpr std::size_t kDefaultCalibrationTrials = 500;
inline constexpr std::size_t kDefaultBenchmarkTrials = 200;

struct ScenarioConfig {
  std::vector<std::size_t> dims;
  std::size_t rank = 5;
  /// Pairwise column correlation per mode; empty means uncorrelated.
  std::vector<double> correlation;
  double snr_db = 0.0;
  std::size_t trials = kDefaultCalibrationTrials;
  std::uint64_t master_seed = 0;
  std::vector<Method> methods{Method::Large, Method::LargePf};
  double rho = kDefaultRho;
  double epsilon = kDefaultEpsilon;
  std::vector<double> rho_grid;
  std::vector<double> snr_grid;

  /// std::invalid_argument on bad dims, rank >= min dim, correlation outside
  /// [0, 1) or a non-finite SNR.
  void validate_model() const;
  /// validate_model() plus zero trials, an empty method list, bad thresholds
  /// or LaRGE requested on a tensor with a dimension below 4.
  void validate() const;
  [[nodiscard]] std::vector<double> correlation_or_zero() const;
};

/// Estimated rank per requested method.
using TrialResult = std::map<Method, std::size_t>;

/// Factors with pairwise column correlation r_d in mode d:
/// F_d = G_d chol(C_d)^T with C_d = (1 - r_d) I + r_d 1 1^T and G_d standard normal.
[[nodiscard]] FactorSet gen_correlated_factors(std::span<const std::size_t> dims, std::size_t rank,
                                               std::span<const double> correlation, Rng& rng);

/// Correlation matrix C = (1 - r) I + r 1 1^T.
[[nodiscard]] Matrix equicorrelation(std::size_t rank, double r);

/// Noise-free tensor and unit-variance raw noise for one trial; every SNR is
/// realized by rescaling the same raw noise.
struct PlantedTrial {
  FactorSet factors;
  DenseTensor signal;
  DenseTensor raw_noise;
  double signal_norm = 0.0;
  double raw_noise_norm = 0.0;

  [[nodiscard]] DenseTensor noisy_at(double snr_db) const;
};

/// Draws trial `trial_index` from the stream derived from the master seed.
[[nodiscard]] PlantedTrial plant_trial(const ScenarioConfig& cfg, std::size_t trial_index);

/// Runs every requested estimator on trial `trial_index` at cfg.snr_db.
[[nodiscard]] TrialResult run_trial(const ScenarioConfig& cfg, std::size_t trial_index);

/// Runs the estimators in `methods` on one observed tensor, computing the
/// spectra and global eigenvalues once.
[[nodiscard]] TrialResult estimate_all(const DenseTensor& observed, std::span<const Method> methods, double rho,
                                       double epsilon);

struct MonteCarloRow {
  Method method = Method::Large;
  double grid_value = 0.0;
  std::size_t trials = 0;
  std::size_t n_fp = 0;
  std::size_t n_fn = 0;
  std::size_t n_correct = 0;
  double p_fp = 0.0;
  double p_fn = 0.0;
  double pod = 0.0;
};

struct MonteCarloReport {
  /// "calibration" (grid is rho) or "pod_vs_snr" (grid is SNR in dB).
  std::string kind;
  std::vector<MonteCarloRow> rows;
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  ScenarioConfig scenario;

  [[nodiscard]] const MonteCarloRow* find(Method method, double grid_value) const;
};

struct RunOptions {
  std::size_t threads = 1;
};

/// Pfp/Pfn/PoD against rho. Each trial's PESDR trace is computed once and the
/// rank rule is re-applied for every grid value. Baselines do not depend on
/// rho and repeat the same counts on every row.
[[nodiscard]] MonteCarloReport calibrate_threshold(const ScenarioConfig& cfg, std::span<const double> rho_grid,
                                                   const RunOptions& run = {});

/// PoD against SNR at cfg.rho. All grid points share each trial's factors
/// and raw noise.
[[nodiscard]] MonteCarloReport pod_vs_snr(const ScenarioConfig& cfg, std::span<const double> snr_grid,
                                          const RunOptions& run = {});

/// Threads to use: MOE_THREADS when set and valid, else `requested` (min 1).
[[nodiscard]] std::size_t resolve_threads(std::size_t requested);

}  // namespace moe
