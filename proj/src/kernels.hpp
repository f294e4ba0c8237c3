#pragma once

// Layout-level helpers shared by the spectra and ALS code. Not installed.

#include <cstddef>
#include <span>
#include <vector>

#include "moe/tensor.hpp"

namespace moe::detail {

/// The tensor seen as P blocks of M_d x Q, where P is the product of the dims
/// before `mode` and Q the product after it.
struct ModeSplit {
  std::size_t before = 1;
  std::size_t extent = 1;
  std::size_t after = 1;
};

[[nodiscard]] ModeSplit split_at(std::span<const std::size_t> dims, std::size_t mode);

/// M_d x (P*Q) matrix of mode-d fibers with block-major column order
/// (column p*Q + q holds fiber (p, :, q)). Same column set as unfold() in a
/// different order, which is all a Gram matrix needs.
[[nodiscard]] Matrix fiber_matrix(const DenseTensor& t, std::size_t mode);

/// Row-wise Khatri-Rao product of factors[first..last) in last-index-fastest
/// row order. An empty range yields a 1 x R matrix of ones.
[[nodiscard]] Matrix khatri_rao_rows(std::span<const Matrix> factors, std::size_t first, std::size_t last,
                                     Eigen::Index rank);

/// Matricized tensor times Khatri-Rao product for `mode`:
/// result(i, r) = sum over all other indices of t * prod_{e != mode} F_e(i_e, r).
[[nodiscard]] Matrix mttkrp(const DenseTensor& t, std::span<const Matrix> factors, std::size_t mode);

/// Gram matrix of the mode-d fibers, using the smaller of the two
/// orientations (M_d x M_d, or the column Gram when M_d exceeds the column
/// count). Only the lower triangle is filled.
[[nodiscard]] Matrix mode_gram(const DenseTensor& t, std::size_t mode);

/// True when mode_gram() uses the M_d x M_d orientation.
[[nodiscard]] bool row_gram(std::span<const std::size_t> dims, std::size_t mode);

/// Descending square roots of the eigenvalues of `scale * gram` (lower
/// triangle referenced), clamped at zero.
[[nodiscard]] std::vector<double> singular_values_from_gram(const Matrix& gram, double scale);

}  // namespace moe::detail
