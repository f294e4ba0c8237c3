#include "kernels.hpp"

#include <stdexcept>

namespace moe::detail {

ModeSplit split_at(std::span<const std::size_t> dims, std::size_t mode) {
  if (mode >= dims.size()) throw std::out_of_range("mode out of range");
  ModeSplit s;
  for (std::size_t e = 0; e < mode; ++e) s.before *= dims[e];
  s.extent = dims[mode];
  for (std::size_t e = mode + 1; e < dims.size(); ++e) s.after *= dims[e];
  return s;
}

Matrix fiber_matrix(const DenseTensor& t, std::size_t mode) {
  const ModeSplit s = split_at(t.dims(), mode);
  const auto rows = static_cast<Eigen::Index>(s.extent);
  const auto q = static_cast<Eigen::Index>(s.after);
  Matrix m(rows, static_cast<Eigen::Index>(s.before * s.after));
  const double* base = t.data().data();
  for (std::size_t p = 0; p < s.before; ++p) {
    Eigen::Map<const RowMajorMatrix> block(base + p * s.extent * s.after, rows, q);
    m.middleCols(static_cast<Eigen::Index>(p) * q, q) = block;
  }
  return m;
}

Matrix khatri_rao_rows(std::span<const Matrix> factors, std::size_t first, std::size_t last, Eigen::Index rank) {
  Matrix k = Matrix::Ones(1, rank);
  for (std::size_t e = first; e < last; ++e) {
    const Matrix& f = factors[e];
    Matrix next(k.rows() * f.rows(), rank);
    for (Eigen::Index r = 0; r < rank; ++r) {
      for (Eigen::Index p = 0; p < k.rows(); ++p) {
        next.col(r).segment(p * f.rows(), f.rows()) = k(p, r) * f.col(r);
      }
    }
    k = std::move(next);
  }
  return k;
}

Matrix mttkrp(const DenseTensor& t, std::span<const Matrix> factors, std::size_t mode) {
  const std::size_t order = t.order();
  const ModeSplit s = split_at(t.dims(), mode);
  const Eigen::Index rank = factors[(mode + 1) % order].cols();
  const Matrix left = khatri_rao_rows(factors, 0, mode, rank);
  const Matrix right = khatri_rao_rows(factors, mode + 1, order, rank);

  const auto extent = static_cast<Eigen::Index>(s.extent);
  const auto before = static_cast<Eigen::Index>(s.before);
  const auto after = static_cast<Eigen::Index>(s.after);
  Matrix result = Matrix::Zero(extent, rank);

  // Contract the larger of the two outer index ranges first so the
  // intermediate stays small.
  if (s.after >= s.before) {
    Eigen::Map<const RowMajorMatrix> x(t.data().data(), before * extent, after);
    const Matrix partial = x * right;
    for (Eigen::Index r = 0; r < rank; ++r)
      for (Eigen::Index p = 0; p < before; ++p) result.col(r) += left(p, r) * partial.col(r).segment(p * extent, extent);
  } else {
    Eigen::Map<const RowMajorMatrix> x(t.data().data(), before, extent * after);
    const Matrix partial = x.transpose() * left;
    for (Eigen::Index r = 0; r < rank; ++r)
      for (Eigen::Index i = 0; i < extent; ++i)
        result(i, r) = partial.col(r).segment(i * after, after).dot(right.col(r));
  }
  return result;
}

}  // namespace moe::detail
