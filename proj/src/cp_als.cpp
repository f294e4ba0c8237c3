#include "moe/cp_als.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "kernels.hpp"
#include "moe/error.hpp"

namespace moe {
namespace {

constexpr double kRidge = 1e-12;

Matrix hosvd_init(const DenseTensor& t, std::size_t mode, Eigen::Index rank, std::uint64_t seed) {
  const auto rows = static_cast<Eigen::Index>(t.dim(mode));
  if (rank > rows) {
    Rng rng(derive_seed(seed, mode));
    Matrix f(rows, rank);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index r = 0; r < rank; ++r) f(i, r) = normal(rng);
    return f;
  }
  const Matrix a = detail::fiber_matrix(t, mode);
  Matrix g = Matrix::Zero(rows, rows);
  g.selfadjointView<Eigen::Lower>().rankUpdate(a);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(g);
  if (solver.info() != Eigen::Success) throw std::runtime_error("HOSVD initialization failed");
  Matrix f(rows, rank);
  for (Eigen::Index r = 0; r < rank; ++r) f.col(r) = solver.eigenvectors().col(rows - 1 - r);
  return f;
}

// Solves F * V = M for F given the symmetric R x R system matrix V.
Matrix solve_normal_equations(const Matrix& v, const Matrix& m, bool& regularized) {
  Eigen::LLT<Matrix> llt(v);
  if (llt.info() == Eigen::Success) {
    Matrix f = llt.solve(m.transpose()).transpose();
    if (f.allFinite()) return f;
  }
  regularized = true;
  const Matrix ridged = v + kRidge * Matrix::Identity(v.rows(), v.cols());
  return ridged.ldlt().solve(m.transpose()).transpose();
}

double relative_residual(const DenseTensor& t, const FactorSet& f, const Eigen::VectorXd& weights, double norm_x) {
  FactorSet scaled = f;
  scaled.factors.front() = scaled.factors.front() * weights.asDiagonal();
  const DenseTensor model = cp_construct(scaled);
  const auto x = t.data();
  const auto y = model.data();
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    ss += d * d;
  }
  return std::sqrt(ss) / norm_x;
}

}  // namespace

std::size_t max_cp_rank(std::span<const std::size_t> dims) {
  if (dims.empty()) return 0;
  return element_count(dims) / *std::max_element(dims.begin(), dims.end());
}

std::vector<double> loading_factors(const FactorSet& f) {
  f.validate();
  std::vector<double> out(f.rank(), 1.0);
  for (const Matrix& factor : f.factors)
    for (Eigen::Index r = 0; r < factor.cols(); ++r) out[static_cast<std::size_t>(r)] *= factor.col(r).norm();
  return out;
}

CpResult cp_als(const DenseTensor& t, std::size_t rank, const CpOptions& opts) {
  const std::size_t limit = max_cp_rank(t.dims());
  if (rank < 1 || rank > limit)
    throw InfeasibleError("CP rank " + std::to_string(rank) + " outside the feasible range 1.." + std::to_string(limit));
  if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(opts.tol >= 0.0)) throw std::invalid_argument("tol must be non-negative");
  for (double v : t.data())
    if (!std::isfinite(v)) throw std::domain_error("tensor contains non-finite entries");
  const double norm_x = frobenius_norm(t);
  if (!(norm_x > 0.0)) throw std::domain_error("cannot decompose a zero tensor");

  const std::size_t order = t.order();
  const auto r_count = static_cast<Eigen::Index>(rank);

  CpResult result;
  FactorSet& f = result.factors;
  f.factors.reserve(order);
  for (std::size_t d = 0; d < order; ++d) f.factors.push_back(hosvd_init(t, d, r_count, opts.seed));
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(r_count);

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
    for (std::size_t d = 0; d < order; ++d) {
      Matrix v = Matrix::Ones(r_count, r_count);
      for (std::size_t e = 0; e < order; ++e)
        if (e != d) v = v.cwiseProduct(f.factors[e].transpose() * f.factors[e]);
      const Matrix m = detail::mttkrp(t, f.factors, d);
      Matrix updated = solve_normal_equations(v, m, result.regularized);
      for (Eigen::Index r = 0; r < r_count; ++r) {
        const double n = updated.col(r).norm();
        weights(r) = n;
        if (n > 0.0) updated.col(r) /= n;
      }
      f.factors[d] = std::move(updated);
    }
    const double fit = relative_residual(t, f, weights, norm_x);
    result.fit_history.push_back(fit);
    result.iterations = iter;
    result.relative_fit = fit;
    if (previous - fit < opts.tol) {
      result.converged = true;
      break;
    }
    previous = fit;
  }

  // Order components by loading and fix the sign of each rank-one term.
  std::vector<std::size_t> perm(rank);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return weights(static_cast<Eigen::Index>(a)) > weights(static_cast<Eigen::Index>(b));
  });
  FactorSet sorted;
  for (const Matrix& factor : f.factors) {
    Matrix p(factor.rows(), r_count);
    for (Eigen::Index r = 0; r < r_count; ++r) p.col(r) = factor.col(static_cast<Eigen::Index>(perm[r]));
    sorted.factors.push_back(std::move(p));
  }
  result.loadings.resize(rank);
  for (std::size_t r = 0; r < rank; ++r) result.loadings[r] = weights(static_cast<Eigen::Index>(perm[r]));

  for (Eigen::Index r = 0; r < r_count; ++r) {
    Eigen::Index peak = 0;
    sorted.factors[0].col(r).cwiseAbs().maxCoeff(&peak);
    if (sorted.factors[0](peak, r) < 0.0) {
      sorted.factors[0].col(r) *= -1.0;
      sorted.factors[1].col(r) *= -1.0;
    }
  }
  f = std::move(sorted);
  return result;
}

}  // namespace moe
