#include "moe/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kernels.hpp"

namespace moe {
namespace {

// Blocks narrower than this are gathered into one matrix before the rank
// update; wider ones are fed to the update in place.
constexpr std::size_t kInPlaceBlockWidth = 64;

void require_finite(const DenseTensor& t) {
  for (double v : t.data())
    if (!std::isfinite(v)) throw std::domain_error("tensor contains non-finite entries");
}

}  // namespace

namespace detail {

Matrix mode_gram(const DenseTensor& t, std::size_t mode) {
  const ModeSplit s = split_at(t.dims(), mode);
  const auto rows = static_cast<Eigen::Index>(s.extent);
  const std::size_t cols = s.before * s.after;

  if (s.extent > cols) {
    const Matrix a = fiber_matrix(t, mode);
    Matrix g = Matrix::Zero(a.cols(), a.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    return g;
  }

  Matrix g = Matrix::Zero(rows, rows);
  if (s.after >= kInPlaceBlockWidth || s.before == 1) {
    const auto width = static_cast<Eigen::Index>(s.after);
    const double* base = t.data().data();
    for (std::size_t p = 0; p < s.before; ++p) {
      Eigen::Map<const RowMajorMatrix> block(base + p * s.extent * s.after, rows, width);
      g.selfadjointView<Eigen::Lower>().rankUpdate(block);
    }
  } else {
    const Matrix a = fiber_matrix(t, mode);
    g.selfadjointView<Eigen::Lower>().rankUpdate(a);
  }
  return g;
}

std::vector<double> singular_values_from_gram(const Matrix& gram, double scale) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Gram eigendecomposition failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  std::vector<double> sv(static_cast<std::size_t>(ev.size()));
  // Eigenvalues come back ascending.
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    sv[static_cast<std::size_t>(k)] = std::sqrt(std::max(ev(ev.size() - 1 - k) * scale, 0.0));
  return sv;
}

bool row_gram(std::span<const std::size_t> dims, std::size_t mode) {
  const ModeSplit s = split_at(dims, mode);
  return s.extent <= s.before * s.after;
}

}  // namespace detail

std::vector<double> mode_singular_values(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order()) throw std::out_of_range("mode out of range");
  require_finite(t);
  return detail::singular_values_from_gram(detail::mode_gram(t, mode), 1.0);
}

ModeSpectra mode_spectra(const DenseTensor& t) {
  require_finite(t);
  ModeSpectra out;
  out.per_mode.reserve(t.order());
  for (std::size_t d = 0; d < t.order(); ++d)
    out.per_mode.push_back(detail::singular_values_from_gram(detail::mode_gram(t, d), 1.0));
  return out;
}

ModeSpectra unit_norm_spectra(const DenseTensor& t) {
  require_finite(t);
  const double norm = frobenius_norm(t);
  if (!(norm > 0.0)) throw std::domain_error("global eigenvalues of a zero tensor are undefined");
  // Scaling the Gram matrix by 1/|t|^2 is the same as normalizing t first.
  const double scale = 1.0 / (norm * norm);
  ModeSpectra out;
  out.per_mode.reserve(t.order());
  for (std::size_t d = 0; d < t.order(); ++d)
    out.per_mode.push_back(detail::singular_values_from_gram(detail::mode_gram(t, d), scale));
  return out;
}

GlobalEigenvalueProfile global_eigenvalues(const ModeSpectra& unit_spectra) {
  if (unit_spectra.per_mode.size() < 2) throw std::invalid_argument("need spectra for at least two modes");
  std::size_t m = unit_spectra.per_mode.front().size();
  for (const auto& sv : unit_spectra.per_mode) m = std::min(m, sv.size());

  GlobalEigenvalueProfile profile;
  profile.values.assign(m, 1.0);
  profile.logs.assign(m, 0.0);
  for (const auto& sv : unit_spectra.per_mode) {
    for (std::size_t i = 0; i < m; ++i) {
      const double s = std::max(sv[i], kSingularValueFloor);
      profile.values[i] *= s * s;
      profile.logs[i] += 2.0 * std::log(s);
    }
  }
  return profile;
}

GlobalEigenvalueProfile global_eigenvalues(const DenseTensor& t) { return global_eigenvalues(unit_norm_spectra(t)); }

}  // namespace moe
