#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "moe/rng.hpp"

namespace moe {

using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense real D-way array (D >= 2) stored with the last index varying fastest.
///
/// Modes are addressed 0-based throughout the C++ API.
class DenseTensor {
 public:
  explicit DenseTensor(std::vector<std::size_t> dims);
  DenseTensor(std::vector<std::size_t> dims, std::vector<double> data);

  [[nodiscard]] std::size_t order() const noexcept { return dims_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
  [[nodiscard]] const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  /// Flat offset of a multi-index; no bounds checks beyond the index count.
  [[nodiscard]] std::size_t offset(std::span<const std::size_t> index) const;

  double& operator()(std::initializer_list<std::size_t> index) {
    return data_[offset({index.begin(), index.size()})];
  }
  double operator()(std::initializer_list<std::size_t> index) const {
    return data_[offset({index.begin(), index.size()})];
  }

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

/// Factor matrices F_0..F_{D-1}, F_d of shape M_d x R.
struct FactorSet {
  std::vector<Matrix> factors;

  [[nodiscard]] std::size_t rank() const { return factors.empty() ? 0 : static_cast<std::size_t>(factors.front().cols()); }
  [[nodiscard]] std::size_t order() const noexcept { return factors.size(); }
  [[nodiscard]] std::vector<std::size_t> dims() const;
  /// Throws std::invalid_argument unless D >= 2, R >= 1 and all column counts agree.
  void validate() const;
};

struct SnrSpec {
  double snr_db = 0.0;
};

struct NoisyTensor {
  DenseTensor noisy;
  DenseTensor noise;
};

[[nodiscard]] std::size_t element_count(std::span<const std::size_t> dims);

/// d-mode unfolding, shape M_d x prod_{e != d} M_e.
///
/// Columns follow the cyclic ordering d+1, ..., D-1, 0, ..., d-1 with the
/// first of those modes varying fastest.
[[nodiscard]] Matrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold() for the given target dims.
[[nodiscard]] DenseTensor fold(const Matrix& m, std::size_t mode, std::vector<std::size_t> dims);

/// t x_d u, where u is J x M_d.
[[nodiscard]] DenseTensor mode_product(const DenseTensor& t, const Matrix& u, std::size_t mode);

/// Sum over r of the outer products of the r-th factor columns.
[[nodiscard]] DenseTensor cp_construct(const FactorSet& f);

[[nodiscard]] double frobenius_norm(const DenseTensor& t);
[[nodiscard]] double frobenius_norm(std::span<const double> values);

/// Unit Frobenius norm copy; std::domain_error for the zero tensor.
[[nodiscard]] DenseTensor normalize(const DenseTensor& t);

/// Adds i.i.d. Gaussian noise scaled so that the realized ratio
/// 10 log10(|t0|^2 / |noise|^2) equals the requested SNR exactly.
[[nodiscard]] NoisyTensor add_noise_at_snr(const DenseTensor& t0, SnrSpec snr, Rng& rng);

/// Noise amplitude that brings `raw_noise` to the requested SNR against a
/// signal of Frobenius norm `signal_norm`.
[[nodiscard]] double noise_scale(double signal_norm, double raw_noise_norm, double snr_db);

}  // namespace moe
