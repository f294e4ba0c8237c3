#pragma once

#include <cstddef>
#include <vector>

#include "moe/tensor.hpp"

namespace moe {

/// Singular values of every d-mode unfolding, each sorted non-increasing.
/// Vector d has length min(M_d, prod_{e != d} M_e).
struct ModeSpectra {
  std::vector<std::vector<double>> per_mode;
};

/// Global eigenvalues (products of squared d-mode singular values sharing an
/// index) of a unit-norm tensor, together with their natural logarithms.
struct GlobalEigenvalueProfile {
  std::vector<double> values;
  std::vector<double> logs;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Singular values below this are clamped before entering logarithms.
inline constexpr double kSingularValueFloor = 1e-150;

/// Singular values of unfold(t, mode), descending. Uses the eigenvalues of
/// the smaller Gram matrix; std::domain_error on non-finite input.
[[nodiscard]] std::vector<double> mode_singular_values(const DenseTensor& t, std::size_t mode);

[[nodiscard]] ModeSpectra mode_spectra(const DenseTensor& t);

/// Profile of length min_d M_d computed from the tensor rescaled to unit
/// Frobenius norm. std::domain_error for the zero tensor.
[[nodiscard]] GlobalEigenvalueProfile global_eigenvalues(const DenseTensor& t);

/// Profile from spectra that already belong to a unit-norm tensor.
[[nodiscard]] GlobalEigenvalueProfile global_eigenvalues(const ModeSpectra& unit_spectra);

/// Spectra of t / |t|_F, computed without materializing the rescaled copy.
[[nodiscard]] ModeSpectra unit_norm_spectra(const DenseTensor& t);

}  // namespace moe
