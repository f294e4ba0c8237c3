#include "moe/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace moe {
namespace {

constexpr std::array<std::pair<Method, std::string_view>, 6> kMethodTags{{
    {Method::Large, "large"},
    {Method::LargePf, "large-pf"},
    {Method::Aic, "aic"},
    {Method::Mdl, "mdl"},
    {Method::NdAic, "nd-aic"},
    {Method::NdMdl, "nd-mdl"},
}};

}  // namespace

std::string_view to_string(Method m) noexcept {
  for (const auto& [method, tag] : kMethodTags)
    if (method == m) return tag;
  return "unknown";
}

std::optional<Method> parse_method(std::string_view tag) noexcept {
  for (const auto& [method, name] : kMethodTags)
    if (name == tag) return method;
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::Large, Method::LargePf, Method::Aic,
                                           Method::Mdl,   Method::NdAic,   Method::NdMdl};
  return methods;
}

void LargeConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be positive and finite");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive and finite");
}

LineFit ols_line_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("ols_line_fit: x and y differ in length");
  if (x.size() < 2) throw std::invalid_argument("ols_line_fit: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    sxx += dx * dx;
    sxy += dx * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("ols_line_fit: need at least two distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double penalty_factor(std::size_t index) noexcept {
  return index >= 3 ? std::log10(static_cast<double>(index - 1)) : 1.0;
}

PesdrTrace pesdr_trace(std::span<const double> logs, const LargeConfig& cfg) {
  cfg.validate();
  const std::size_t m = logs.size();
  if (m < 4) throw std::invalid_argument("LaRGE needs at least 4 global eigenvalues, got " + std::to_string(m));
  for (double v : logs)
    if (!std::isfinite(v)) throw std::invalid_argument("log profile contains non-finite values");
  const auto [lo, hi] = std::minmax_element(logs.begin(), logs.end());
  if (*lo == *hi) throw std::domain_error("degenerate profile: all log eigenvalues are equal");

  std::vector<double> idx(m);
  for (std::size_t k = 0; k < m; ++k) idx[k] = static_cast<double>(k + 1);

  PesdrTrace trace;
  trace.profile_size = m;
  trace.epsilon = cfg.epsilon;
  trace.entries.reserve(m - 2);

  std::vector<double> residuals;
  residuals.reserve(m);
  for (std::size_t i = m - 2; i >= 1; --i) {
    // Fit over indices i+1..m, i.e. zero-based positions i..m-1.
    const std::span<const double> xs(idx.data() + i, m - i);
    const std::span<const double> ys(logs.data() + i, m - i);
    const LineFit fit = ols_line_fit(xs, ys);

    PesdrEntry e;
    e.index = i;
    e.slope = fit.slope;
    e.intercept = fit.intercept;
    e.lambda = logs[i - 1];
    e.lambda_hat = fit.slope * static_cast<double>(i) + fit.intercept;
    e.abs_error = e.lambda - e.lambda_hat;
    e.rel_error = e.abs_error / std::abs(e.lambda_hat);

    residuals.clear();
    double mean = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      residuals.push_back(ys[k] - (fit.slope * xs[k] + fit.intercept));
      mean += residuals.back();
    }
    mean /= static_cast<double>(residuals.size());
    double ss = 0.0;
    for (double r : residuals) ss += (r - mean) * (r - mean);
    e.residual_mean = mean;
    e.residual_std = std::sqrt(ss / static_cast<double>(residuals.size() - 1));

    e.pesdr = e.residual_std > 0.0 ? e.rel_error / e.residual_std : 0.0;
    e.pesdr_pf = e.pesdr / penalty_factor(i);
    e.suppressed = e.residual_std < cfg.epsilon;
    trace.entries.push_back(e);
  }
  return trace;
}

PesdrTrace pesdr_trace(const GlobalEigenvalueProfile& profile, const LargeConfig& cfg) {
  return pesdr_trace(std::span<const double>(profile.logs), cfg);
}

std::size_t large_rank(const PesdrTrace& trace, const LargeConfig& cfg, bool* defaulted) {
  for (const PesdrEntry& e : trace.entries) {
    if (e.residual_std < cfg.epsilon) continue;
    const double stat = cfg.use_penalty ? e.pesdr_pf : e.pesdr;
    if (stat >= cfg.rho) {
      if (defaulted) *defaulted = false;
      return e.index;
    }
  }
  if (defaulted) *defaulted = true;
  return 1;
}

RankEstimate estimate_rank(const PesdrTrace& trace, const LargeConfig& cfg) {
  cfg.validate();
  RankEstimate out;
  out.method = cfg.use_penalty ? Method::LargePf : Method::Large;
  out.rank = large_rank(trace, cfg, &out.defaulted);
  out.trace = trace;
  return out;
}

RankEstimate estimate_large(const GlobalEigenvalueProfile& profile, const LargeConfig& cfg) {
  return estimate_rank(pesdr_trace(profile, cfg), cfg);
}

}  // namespace moe
