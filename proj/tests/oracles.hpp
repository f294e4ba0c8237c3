#pragma once

// Independent reference implementations used only by the tests. They favour
// obviousness over speed and share no code with the library.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "moe/tensor.hpp"

namespace oracle {

using moe::DenseTensor;
using moe::Matrix;

inline std::vector<std::size_t> multi_index(std::size_t flat, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> idx(dims.size());
  for (std::size_t d = dims.size(); d-- > 0;) {
    idx[d] = flat % dims[d];
    flat /= dims[d];
  }
  return idx;
}

// Column of element `idx` in the mode-`mode` unfolding: modes mode+1, ...,
// D-1, 0, ..., mode-1 with the first of them varying fastest.
inline std::size_t unfold_column(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& dims,
                                 std::size_t mode) {
  const std::size_t order = dims.size();
  std::size_t col = 0;
  std::size_t stride = 1;
  for (std::size_t k = 1; k < order; ++k) {
    const std::size_t e = (mode + k) % order;
    col += idx[e] * stride;
    stride *= dims[e];
  }
  return col;
}

inline Matrix unfold(const DenseTensor& t, std::size_t mode) {
  const auto& dims = t.dims();
  const std::size_t cols = t.size() / dims[mode];
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dims[mode]), static_cast<Eigen::Index>(cols));
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const auto idx = multi_index(flat, dims);
    out(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(unfold_column(idx, dims, mode))) =
        t.data()[flat];
  }
  return out;
}

inline std::vector<double> singular_values(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Eigen::VectorXd s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

inline DenseTensor cp_sum(const std::vector<Matrix>& factors) {
  std::vector<std::size_t> dims;
  for (const Matrix& f : factors) dims.push_back(static_cast<std::size_t>(f.rows()));
  DenseTensor t(dims);
  const Eigen::Index rank = factors.front().cols();
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const auto idx = multi_index(flat, dims);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < rank; ++r) {
      double prod = 1.0;
      for (std::size_t d = 0; d < dims.size(); ++d) prod *= factors[d](static_cast<Eigen::Index>(idx[d]), r);
      sum += prod;
    }
    t.data()[flat] = sum;
  }
  return t;
}

inline DenseTensor random_tensor(std::vector<std::size_t> dims, std::mt19937_64& rng) {
  DenseTensor t(std::move(dims));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : t.data()) v = u(rng);
  return t;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

// Tensor with its modes reordered so that new mode k is old mode perm[k].
inline DenseTensor permute(const DenseTensor& t, const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> dims(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) dims[k] = t.dims()[perm[k]];
  DenseTensor out(dims);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const auto idx = multi_index(flat, t.dims());
    std::size_t target = 0;
    for (std::size_t k = 0; k < perm.size(); ++k) target = target * dims[k] + idx[perm[k]];
    out.data()[target] = t.data()[flat];
  }
  return out;
}

struct Fit {
  double slope;
  double intercept;
};

// Normal equations written out with raw sums.
inline Fit normal_equations(const std::vector<double>& x, const std::vector<double>& y) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    n += 1;
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

struct PesdrStep {
  std::size_t i;
  double a1, a2, lambda_hat, delta, delta_rel, sigma, mean, pesdr;
};

// One scan step at 1-based index i over logs (logs[0] is index 1).
inline PesdrStep pesdr_step(const std::vector<double>& logs, std::size_t i) {
  const std::size_t m = logs.size();
  std::vector<double> x, y;
  for (std::size_t j = i + 1; j <= m; ++j) {
    x.push_back(static_cast<double>(j));
    y.push_back(logs[j - 1]);
  }
  const Fit f = normal_equations(x, y);
  PesdrStep s{};
  s.i = i;
  s.a1 = f.slope;
  s.a2 = f.intercept;
  s.lambda_hat = f.slope * static_cast<double>(i) + f.intercept;
  s.delta = logs[i - 1] - s.lambda_hat;
  s.delta_rel = s.delta / std::abs(s.lambda_hat);
  double sum = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sum += y[k] - (f.slope * x[k] + f.intercept);
  s.mean = sum / static_cast<double>(x.size());
  double ss = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (f.slope * x[k] + f.intercept) - s.mean;
    ss += r * r;
  }
  s.sigma = std::sqrt(ss / static_cast<double>(x.size() - 1));
  s.pesdr = s.sigma == 0.0 ? 0.0 : s.delta_rel / s.sigma;
  return s;
}

// log10(geometric mean / arithmetic mean) of eigs[i..], by direct product and sum.
inline double log_likelihood(const std::vector<double>& eigs, std::size_t i) {
  const double n = static_cast<double>(eigs.size() - i);
  double prod = 1.0, sum = 0.0;
  for (std::size_t k = i; k < eigs.size(); ++k) {
    prod *= eigs[k];
    sum += eigs[k];
  }
  return std::log10(std::pow(prod, 1.0 / n) / (sum / n));
}

inline double aic(const std::vector<double>& eigs, double n, std::size_t i) {
  const double m = static_cast<double>(eigs.size());
  const double id = static_cast<double>(i);
  return -2.0 * n * (m - id) * log_likelihood(eigs, i) + 2.0 * id * (2.0 * m - id);
}

inline double mdl(const std::vector<double>& eigs, double n, std::size_t i) {
  const double m = static_cast<double>(eigs.size());
  const double id = static_cast<double>(i);
  return -n * (m - id) * log_likelihood(eigs, i) + 0.5 * id * (2.0 * m - id) * std::log10(n);
}

inline std::size_t argmin(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] < v[best]) best = k;
  return best;
}

// Smallest absolute congruence between planted and recovered rank-one terms
// after greedy one-to-one matching. Congruence of term r with term s is the
// product over modes of |cos| between the factor columns.
inline double min_congruence(const std::vector<Matrix>& planted, const std::vector<Matrix>& recovered) {
  const Eigen::Index rank = planted.front().cols();
  Matrix c = Matrix::Ones(rank, rank);
  for (std::size_t d = 0; d < planted.size(); ++d) {
    for (Eigen::Index r = 0; r < rank; ++r) {
      for (Eigen::Index s = 0; s < rank; ++s) {
        const Eigen::VectorXd a = planted[d].col(r);
        const Eigen::VectorXd b = recovered[d].col(s);
        c(r, s) *= std::abs(a.dot(b)) / (a.norm() * b.norm());
      }
    }
  }
  std::vector<bool> used_r(static_cast<std::size_t>(rank)), used_s(static_cast<std::size_t>(rank));
  double worst = 1.0;
  for (Eigen::Index step = 0; step < rank; ++step) {
    double best = -1;
    Eigen::Index br = 0, bs = 0;
    for (Eigen::Index r = 0; r < rank; ++r)
      for (Eigen::Index s = 0; s < rank; ++s)
        if (!used_r[static_cast<std::size_t>(r)] && !used_s[static_cast<std::size_t>(s)] && c(r, s) > best) {
          best = c(r, s);
          br = r;
          bs = s;
        }
    used_r[static_cast<std::size_t>(br)] = true;
    used_s[static_cast<std::size_t>(bs)] = true;
    worst = std::min(worst, best);
  }
  return worst;
}

}  // namespace oracle
