#include "moe/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace moe {
namespace {

Method method_for(InformationCriterion kind, bool nd) {
  if (kind == InformationCriterion::Aic) return nd ? Method::NdAic : Method::Aic;
  return nd ? Method::NdMdl : Method::Mdl;
}

RankEstimate run_criterion(const InformationCriterionInput& in, InformationCriterion kind, Method tag) {
  RankEstimate out;
  out.method = tag;
  out.criterion = criterion_curve(in, kind);
  out.rank = argmin_order(out.criterion);
  return out;
}

}  // namespace

InformationCriterionInput make_ic_input(std::vector<double> eigenvalues, double snapshots) {
  if (eigenvalues.empty()) throw std::invalid_argument("information criterion needs at least one eigenvalue");
  if (!(snapshots >= 1.0)) throw std::invalid_argument("snapshot count must be at least 1");
  for (double& v : eigenvalues) {
    if (std::isnan(v)) throw std::invalid_argument("eigenvalue is NaN");
    v = std::max(v, kEigenvalueFloor);
  }
  for (std::size_t k = 1; k < eigenvalues.size(); ++k)
    if (eigenvalues[k] > eigenvalues[k - 1]) throw std::invalid_argument("eigenvalues must be non-increasing");
  return {std::move(eigenvalues), snapshots};
}

double log_likelihood(std::span<const double> eigs, std::size_t i) {
  if (i >= eigs.size()) throw std::out_of_range("log_likelihood: empty tail");
  const std::span<const double> tail = eigs.subspan(i);
  // Rescale by the largest tail value so neither mean underflows.
  const double top = *std::max_element(tail.begin(), tail.end());
  if (!(top > 0.0)) throw std::domain_error("log_likelihood: eigenvalues must be positive");
  double mean_log = 0.0;
  double mean = 0.0;
  for (double v : tail) {
    mean_log += std::log10(v / top);
    mean += v / top;
  }
  const auto n = static_cast<double>(tail.size());
  return mean_log / n - std::log10(mean / n);
}

std::vector<double> criterion_curve(const InformationCriterionInput& in, InformationCriterion kind) {
  const std::size_t m = in.eigenvalues.size();
  const double big_m = static_cast<double>(m);
  const double n = in.snapshots;
  std::vector<double> curve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double di = static_cast<double>(i);
    const double fit = n * (big_m - di) * log_likelihood(in.eigenvalues, i);
    const double dof = di * (2.0 * big_m - di);
    curve[i] = kind == InformationCriterion::Aic ? -2.0 * fit + 2.0 * dof : -fit + 0.5 * dof * std::log10(n);
  }
  return curve;
}

std::vector<double> aic_curve(const InformationCriterionInput& in) {
  return criterion_curve(in, InformationCriterion::Aic);
}

std::vector<double> mdl_curve(const InformationCriterionInput& in) {
  return criterion_curve(in, InformationCriterion::Mdl);
}

std::size_t argmin_order(std::span<const double> curve) {
  if (curve.empty()) throw std::invalid_argument("argmin of an empty curve");
  std::size_t best = 0;
  for (std::size_t k = 1; k < curve.size(); ++k)
    if (curve[k] < curve[best]) best = k;
  return best;
}

std::size_t classical_mode(std::span<const std::size_t> dims) {
  if (dims.empty()) throw std::invalid_argument("no dimensions");
  return static_cast<std::size_t>(std::max_element(dims.begin(), dims.end()) - dims.begin());
}

RankEstimate classical_moe(const ModeSpectra& spectra, std::span<const std::size_t> dims, InformationCriterion kind) {
  if (spectra.per_mode.size() != dims.size()) throw std::invalid_argument("spectra and dims disagree on order");
  const std::size_t mode = classical_mode(dims);
  const std::vector<double>& sv = spectra.per_mode[mode];
  std::vector<double> eigs(sv.size());
  std::transform(sv.begin(), sv.end(), eigs.begin(), [](double s) { return s * s; });
  const double snapshots = static_cast<double>(element_count(dims) / dims[mode]);
  return run_criterion(make_ic_input(std::move(eigs), snapshots), kind, method_for(kind, false));
}

RankEstimate classical_moe(const DenseTensor& t, InformationCriterion kind) {
  return classical_moe(mode_spectra(t), t.dims(), kind);
}

double nd_snapshots(std::span<const std::size_t> dims) {
  if (dims.empty()) throw std::invalid_argument("no dimensions");
  return static_cast<double>(*std::min_element(dims.begin(), dims.end()));
}

RankEstimate nd_moe(const GlobalEigenvalueProfile& profile, std::span<const std::size_t> dims,
                    InformationCriterion kind) {
  return run_criterion(make_ic_input(profile.values, nd_snapshots(dims)), kind, method_for(kind, true));
}

}  // namespace moe
