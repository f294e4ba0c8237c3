#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "moe/estimators.hpp"
#include "moe/spectra.hpp"
#include "moe/tensor.hpp"

namespace moe {

enum class InformationCriterion { Aic, Mdl };

/// Eigenvalues (descending, clamped to kEigenvalueFloor) and snapshot count.
struct InformationCriterionInput {
  std::vector<double> eigenvalues;
  double snapshots = 1.0;
};

inline constexpr double kEigenvalueFloor = 1e-300;

/// Clamps and validates: non-empty, non-increasing, snapshots >= 1.
[[nodiscard]] InformationCriterionInput make_ic_input(std::vector<double> eigenvalues, double snapshots);

/// log10 of geometric over arithmetic mean of eigs[i..M-1] (the M - i
/// smallest values). Requires i < M.
[[nodiscard]] double log_likelihood(std::span<const double> eigs, std::size_t i);

/// AIC_i or MDL_i for i = 0..M-1.
[[nodiscard]] std::vector<double> criterion_curve(const InformationCriterionInput& in, InformationCriterion kind);
[[nodiscard]] std::vector<double> aic_curve(const InformationCriterionInput& in);
[[nodiscard]] std::vector<double> mdl_curve(const InformationCriterionInput& in);

/// Index of the smallest value; ties go to the smallest index.
[[nodiscard]] std::size_t argmin_order(std::span<const double> curve);

/// Mode used by the classical criteria: the largest dimension, first on ties.
[[nodiscard]] std::size_t classical_mode(std::span<const std::size_t> dims);

/// Classical AIC/MDL on the squared singular values of the largest mode.
[[nodiscard]] RankEstimate classical_moe(const DenseTensor& t, InformationCriterion kind);
/// Same, reusing precomputed spectra (any common scale).
[[nodiscard]] RankEstimate classical_moe(const ModeSpectra& spectra, std::span<const std::size_t> dims,
                                         InformationCriterion kind);

/// Snapshot count used by the N-D criteria: the profile length min_d M_d.
[[nodiscard]] double nd_snapshots(std::span<const std::size_t> dims);

/// N-D AIC/MDL on the global eigenvalues.
[[nodiscard]] RankEstimate nd_moe(const GlobalEigenvalueProfile& profile, std::span<const std::size_t> dims,
                                  InformationCriterion kind);

}  // namespace moe
