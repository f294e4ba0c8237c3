#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moe/spectra.hpp"

namespace moe {

enum class Method { Large, LargePf, Aic, Mdl, NdAic, NdMdl };

[[nodiscard]] std::string_view to_string(Method m) noexcept;
/// Accepts "large", "large-pf", "aic", "mdl", "nd-aic", "nd-mdl".
[[nodiscard]] std::optional<Method> parse_method(std::string_view tag) noexcept;
[[nodiscard]] const std::vector<Method>& all_methods();

inline constexpr double kDefaultRho = 0.57;
inline constexpr double kDefaultEpsilon = 1.2e-3;

struct LargeConfig {
  double rho = kDefaultRho;
  /// Residual standard deviations below this suppress the step.
  double epsilon = kDefaultEpsilon;
  bool use_penalty = false;

  void validate() const;
};

/// One step of the bottom-up scan: the line fitted over indices
/// index+1..m and how far the eigenvalue at `index` sits above it.
/// Indices are 1-based, matching the candidate rank they would produce.
struct PesdrEntry {
  std::size_t index = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double lambda = 0.0;
  double lambda_hat = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  double residual_std = 0.0;
  double residual_mean = 0.0;
  double pesdr = 0.0;
  double pesdr_pf = 0.0;
  bool suppressed = false;
};

/// Entries ordered by descending index (m-2 first, 1 last).
struct PesdrTrace {
  std::size_t profile_size = 0;
  double epsilon = kDefaultEpsilon;
  std::vector<PesdrEntry> entries;
};

struct RankEstimate {
  Method method = Method::Large;
  std::size_t rank = 0;
  /// LaRGE only: no index fired and the rank fell back to 1.
  bool defaulted = false;
  /// LaRGE diagnostics (empty for the information criteria).
  PesdrTrace trace;
  /// Information-criterion values for i = 0..M-1 (empty for LaRGE).
  std::vector<double> criterion;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line through (x_k, y_k). Needs at least two distinct x.
[[nodiscard]] LineFit ols_line_fit(std::span<const double> x, std::span<const double> y);

/// log10(i - 1) for i >= 3, else 1.
[[nodiscard]] double penalty_factor(std::size_t index) noexcept;

/// Full LaRGE scan over a log-eigenvalue profile (logs[0] is index 1).
/// Needs m >= 4 finite values that are not all equal.
[[nodiscard]] PesdrTrace pesdr_trace(std::span<const double> logs, const LargeConfig& cfg);
[[nodiscard]] PesdrTrace pesdr_trace(const GlobalEigenvalueProfile& profile, const LargeConfig& cfg);

/// Rank rule: the first non-suppressed entry (scanning from the bottom of
/// the profile) whose statistic reaches rho; rank 1, defaulted, otherwise.
[[nodiscard]] RankEstimate estimate_rank(const PesdrTrace& trace, const LargeConfig& cfg);

/// Rank only, without copying the trace into the result.
[[nodiscard]] std::size_t large_rank(const PesdrTrace& trace, const LargeConfig& cfg, bool* defaulted = nullptr);

[[nodiscard]] RankEstimate estimate_large(const GlobalEigenvalueProfile& profile, const LargeConfig& cfg);

}  // namespace moe
