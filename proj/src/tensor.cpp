#include "moe/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "kernels.hpp"

namespace moe {
namespace {

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("tensor needs at least two modes");
  for (std::size_t m : dims)
    if (m == 0) throw std::invalid_argument("tensor dimensions must be positive");
}

void check_mode(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order())
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range for order-" + std::to_string(t.order()) +
                            " tensor");
}

// Walks every element in memory order and hands (row, column) of the cyclic
// mode-`mode` unfolding to `visit` together with the flat offset.
template <typename Visit>
void for_each_unfolded(const std::vector<std::size_t>& dims, std::size_t mode, Visit&& visit) {
  const std::size_t order = dims.size();
  std::vector<std::size_t> col_stride(order, 0);
  std::size_t stride = 1;
  for (std::size_t k = 1; k < order; ++k) {
    const std::size_t e = (mode + k) % order;
    col_stride[e] = stride;
    stride *= dims[e];
  }
  std::vector<std::size_t> idx(order, 0);
  std::size_t col = 0;
  const std::size_t total = element_count(dims);
  for (std::size_t flat = 0; flat < total; ++flat) {
    visit(idx[mode], col, flat);
    for (std::size_t e = order; e-- > 0;) {
      ++idx[e];
      col += col_stride[e];
      if (idx[e] < dims[e]) break;
      col -= col_stride[e] * dims[e];
      idx[e] = 0;
    }
  }
}

}  // namespace

std::size_t element_count(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(element_count(dims_), 0.0);
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (data_.size() != element_count(dims_))
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) + " does not match dims product " +
                                std::to_string(element_count(dims_)));
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw std::invalid_argument("index arity does not match tensor order");
  std::size_t flat = 0;
  for (std::size_t e = 0; e < dims_.size(); ++e) flat = flat * dims_[e] + index[e];
  return flat;
}

std::vector<std::size_t> FactorSet::dims() const {
  std::vector<std::size_t> out;
  out.reserve(factors.size());
  for (const Matrix& f : factors) out.push_back(static_cast<std::size_t>(f.rows()));
  return out;
}

void FactorSet::validate() const {
  if (factors.size() < 2) throw std::invalid_argument("factor set needs at least two modes");
  const Eigen::Index r = factors.front().cols();
  if (r < 1) throw std::invalid_argument("factor set rank must be at least 1");
  for (const Matrix& f : factors) {
    if (f.cols() != r) throw std::invalid_argument("factor matrices disagree on column count");
    if (f.rows() < 1) throw std::invalid_argument("factor matrix with zero rows");
  }
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  check_mode(t, mode);
  const std::size_t rows = t.dim(mode);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows));
  const auto data = t.data();
  for_each_unfolded(t.dims(), mode, [&](std::size_t row, std::size_t col, std::size_t flat) {
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = data[flat];
  });
  return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, std::vector<std::size_t> dims) {
  DenseTensor t(std::move(dims));
  check_mode(t, mode);
  if (static_cast<std::size_t>(m.rows()) != t.dim(mode) ||
      static_cast<std::size_t>(m.rows() * m.cols()) != t.size())
    throw std::invalid_argument("matrix shape does not match the target unfolding");
  auto data = t.data();
  for_each_unfolded(t.dims(), mode, [&](std::size_t row, std::size_t col, std::size_t flat) {
    data[flat] = m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  });
  return t;
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& u, std::size_t mode) {
  check_mode(t, mode);
  if (static_cast<std::size_t>(u.cols()) != t.dim(mode))
    throw std::invalid_argument("mode_product: matrix has " + std::to_string(u.cols()) + " columns, mode " +
                                std::to_string(mode) + " has size " + std::to_string(t.dim(mode)));
  if (u.rows() < 1) throw std::invalid_argument("mode_product: matrix has no rows");
  std::vector<std::size_t> dims = t.dims();
  dims[mode] = static_cast<std::size_t>(u.rows());
  const Matrix product = u * unfold(t, mode);
  return fold(product, mode, std::move(dims));
}

DenseTensor cp_construct(const FactorSet& f) {
  f.validate();
  const std::size_t order = f.order();
  DenseTensor t(f.dims());
  const Eigen::Index rank = static_cast<Eigen::Index>(f.rank());
  const Matrix left = detail::khatri_rao_rows(f.factors, 0, order - 1, rank);
  const Matrix& last = f.factors.back();
  Eigen::Map<RowMajorMatrix> out(t.data().data(), left.rows(), last.rows());
  out.noalias() = left * last.transpose();
  return t;
}

double frobenius_norm(std::span<const double> values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())).norm();
}

double frobenius_norm(const DenseTensor& t) { return frobenius_norm(t.data()); }

DenseTensor normalize(const DenseTensor& t) {
  const double norm = frobenius_norm(t);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::domain_error("cannot normalize a zero or non-finite tensor");
  DenseTensor out = t;
  for (double& v : out.data()) v /= norm;
  return out;
}

double noise_scale(double signal_norm, double raw_noise_norm, double snr_db) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("SNR must be finite");
  if (!(raw_noise_norm > 0.0)) throw std::domain_error("raw noise has zero norm");
  return signal_norm / (raw_noise_norm * std::pow(10.0, snr_db / 20.0));
}

NoisyTensor add_noise_at_snr(const DenseTensor& t0, SnrSpec snr, Rng& rng) {
  if (!std::isfinite(snr.snr_db)) throw std::invalid_argument("SNR must be finite");
  const double signal_norm = frobenius_norm(t0);
  if (!(signal_norm > 0.0)) throw std::domain_error("cannot set an SNR against a zero-norm signal");

  DenseTensor noise(t0.dims());
  fill_standard_normal(noise.data(), rng);
  const double alpha = noise_scale(signal_norm, frobenius_norm(noise), snr.snr_db);

  DenseTensor noisy = t0;
  auto out = noisy.data();
  auto n = noise.data();
  for (std::size_t k = 0; k < n.size(); ++k) {
    n[k] *= alpha;
    out[k] += n[k];
  }
  return {std::move(noisy), std::move(noise)};
}

}  // namespace moe
