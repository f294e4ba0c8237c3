#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "moe/tensor.hpp"

namespace moe {

struct CpOptions {
  std::size_t max_iters = 500;
  /// Stop once the relative fit improves by less than this.
  double tol = 1e-8;
  /// Seeds the Gaussian fallback initialization.
  std::uint64_t seed = 0;
};

struct CpResult {
  /// Unit-norm columns, ordered by decreasing loading.
  FactorSet factors;
  std::vector<double> loadings;
  /// |X - X_hat|_F / |X|_F of the returned model.
  double relative_fit = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// The normal equations were singular at least once and got +1e-12 I.
  bool regularized = false;
  /// Relative fit after every iteration.
  std::vector<double> fit_history;
};

/// Largest rank cp_als accepts for these dims: prod M / max M.
[[nodiscard]] std::size_t max_cp_rank(std::span<const std::size_t> dims);

/// Rank-R CP decomposition by alternating least squares with HOSVD
/// initialization. InfeasibleError when R is 0 or above max_cp_rank().
[[nodiscard]] CpResult cp_als(const DenseTensor& t, std::size_t rank, const CpOptions& opts = {});

/// lambda_r = prod_d |F_d(:, r)|_2.
[[nodiscard]] std::vector<double> loading_factors(const FactorSet& f);

}  // namespace moe
