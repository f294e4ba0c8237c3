#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

#include "moe/baselines.hpp"
#include "moe/cp_als.hpp"
#include "moe/error.hpp"
#include "moe/estimators.hpp"
#include "moe/io.hpp"
#include "moe/simulation.hpp"
#include "moe/spectra.hpp"

namespace py = pybind11;
using namespace moe;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// numpy's C order is last-index-fastest, the same layout as DenseTensor.
DenseTensor to_tensor(const Array& a) {
  std::vector<std::size_t> dims(a.shape(), a.shape() + a.ndim());
  return DenseTensor(std::move(dims), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const DenseTensor& t) {
  Array a(std::vector<py::ssize_t>(t.dims().begin(), t.dims().end()));
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

Method method_from(const std::string& tag) {
  const auto m = parse_method(tag);
  if (!m) throw ConfigError("unknown method '" + tag + "'");
  return *m;
}

InformationCriterion criterion_from(const std::string& tag) {
  if (tag == "aic") return InformationCriterion::Aic;
  if (tag == "mdl") return InformationCriterion::Mdl;
  throw ConfigError("criterion must be 'aic' or 'mdl', got '" + tag + "'");
}

py::dict trace_columns(const PesdrTrace& trace) {
  std::vector<std::size_t> index;
  std::vector<double> slope, intercept, lambda, lambda_hat, delta, delta_rel, sigma, pesdr, pesdr_pf;
  std::vector<bool> suppressed;
  for (const PesdrEntry& e : trace.entries) {
    index.push_back(e.index);
    slope.push_back(e.slope);
    intercept.push_back(e.intercept);
    lambda.push_back(e.lambda);
    lambda_hat.push_back(e.lambda_hat);
    delta.push_back(e.abs_error);
    delta_rel.push_back(e.rel_error);
    sigma.push_back(e.residual_std);
    pesdr.push_back(e.pesdr);
    pesdr_pf.push_back(e.pesdr_pf);
    suppressed.push_back(e.suppressed);
  }
  py::dict d;
  d["i"] = index;
  d["a1"] = slope;
  d["a2"] = intercept;
  d["lambda"] = lambda;
  d["lambda_hat"] = lambda_hat;
  d["delta"] = delta;
  d["delta_rel"] = delta_rel;
  d["sigma"] = sigma;
  d["pesdr"] = pesdr;
  d["pesdr_pf"] = pesdr_pf;
  d["suppressed"] = suppressed;
  return d;
}

py::dict estimate_dict(const RankEstimate& e) {
  py::dict d;
  d["method"] = std::string(to_string(e.method));
  d["rank"] = e.rank;
  d["defaulted"] = e.defaulted;
  if (!e.trace.entries.empty()) d["trace"] = trace_columns(e.trace);
  if (!e.criterion.empty()) d["criterion"] = e.criterion;
  return d;
}

RankEstimate estimate(const DenseTensor& t, Method method, double rho, double epsilon) {
  switch (method) {
    case Method::Large:
    case Method::LargePf:
      return estimate_large(global_eigenvalues(t), LargeConfig{rho, epsilon, method == Method::LargePf});
    case Method::Aic:
    case Method::Mdl:
      return classical_moe(t, method == Method::Aic ? InformationCriterion::Aic : InformationCriterion::Mdl);
    case Method::NdAic:
    case Method::NdMdl:
      return nd_moe(global_eigenvalues(t), t.dims(),
                    method == Method::NdAic ? InformationCriterion::Aic : InformationCriterion::Mdl);
  }
  throw std::logic_error("unhandled method");
}

ScenarioConfig scenario(const std::string& text) { return scenario_from_json(nlohmann::json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Model order estimation for noisy low-rank tensors";

  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);

  m.def("unfold", [](const Array& a, std::size_t mode) { return unfold(to_tensor(a), mode); }, py::arg("tensor"),
        py::arg("mode"));
  m.def(
      "fold", [](const Matrix& mat, std::size_t mode, std::vector<std::size_t> dims) {
        return to_array(fold(mat, mode, std::move(dims)));
      },
      py::arg("matrix"), py::arg("mode"), py::arg("dims"));
  m.def(
      "mode_product", [](const Array& a, const Matrix& u, std::size_t mode) {
        return to_array(mode_product(to_tensor(a), u, mode));
      },
      py::arg("tensor"), py::arg("matrix"), py::arg("mode"));
  m.def(
      "cp_construct", [](std::vector<Matrix> factors) { return to_array(cp_construct(FactorSet{std::move(factors)})); },
      py::arg("factors"));
  m.def("frobenius_norm", [](const Array& a) { return frobenius_norm(to_tensor(a)); }, py::arg("tensor"));

  m.def(
      "mode_singular_values", [](const Array& a, std::size_t mode) { return mode_singular_values(to_tensor(a), mode); },
      py::arg("tensor"), py::arg("mode"));
  m.def(
      "global_eigenvalues",
      [](const Array& a) {
        const GlobalEigenvalueProfile p = global_eigenvalues(to_tensor(a));
        return py::make_tuple(p.values, p.logs);
      },
      py::arg("tensor"));

  m.def(
      "pesdr_trace",
      [](const std::vector<double>& logs, double rho, double epsilon) {
        return trace_columns(pesdr_trace(logs, LargeConfig{rho, epsilon, false}));
      },
      py::arg("logs"), py::arg("rho") = kDefaultRho, py::arg("epsilon") = kDefaultEpsilon);
  m.def(
      "estimate",
      [](const Array& a, const std::string& method, double rho, double epsilon) {
        return estimate_dict(estimate(to_tensor(a), method_from(method), rho, epsilon));
      },
      py::arg("tensor"), py::arg("method") = "large", py::arg("rho") = kDefaultRho,
      py::arg("epsilon") = kDefaultEpsilon);
  m.def(
      "criterion_curve",
      [](std::vector<double> eigenvalues, double snapshots, const std::string& kind) {
        return criterion_curve(make_ic_input(std::move(eigenvalues), snapshots), criterion_from(kind));
      },
      py::arg("eigenvalues"), py::arg("snapshots"), py::arg("kind") = "aic");

  m.def(
      "cp_als",
      [](const Array& a, std::size_t rank, std::size_t max_iters, double tol, std::uint64_t seed) {
        const DenseTensor t = to_tensor(a);
        CpResult r;
        {
          py::gil_scoped_release release;
          r = cp_als(t, rank, CpOptions{max_iters, tol, seed});
        }
        py::dict d;
        d["factors"] = r.factors.factors;
        d["loadings"] = r.loadings;
        d["relative_fit"] = r.relative_fit;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["regularized"] = r.regularized;
        d["fit_history"] = r.fit_history;
        return d;
      },
      py::arg("tensor"), py::arg("rank"), py::arg("max_iters") = CpOptions{}.max_iters,
      py::arg("tol") = CpOptions{}.tol, py::arg("seed") = 0);

  m.def("read_tnsr", [](const std::filesystem::path& p) { return to_array(read_tnsr(p)); }, py::arg("path"));
  m.def(
      "write_tnsr", [](const std::filesystem::path& p, const Array& a) { write_tnsr(p, to_tensor(a)); },
      py::arg("path"), py::arg("tensor"));

  m.def(
      "plant",
      [](const std::string& scenario_json, std::size_t trial, std::optional<double> snr_db) {
        const ScenarioConfig cfg = scenario(scenario_json);
        const PlantedTrial p = plant_trial(cfg, trial);
        py::dict d;
        d["noisy"] = to_array(p.noisy_at(snr_db.value_or(cfg.snr_db)));
        d["signal"] = to_array(p.signal);
        d["factors"] = p.factors.factors;
        return d;
      },
      py::arg("scenario_json"), py::arg("trial") = 0, py::arg("snr_db") = py::none());
  m.def(
      "calibrate_threshold",
      [](const std::string& scenario_json, const std::vector<double>& rho_grid, std::size_t threads) {
        const ScenarioConfig cfg = scenario(scenario_json);
        py::gil_scoped_release release;
        return to_json(calibrate_threshold(cfg, rho_grid, {resolve_threads(threads)})).dump();
      },
      py::arg("scenario_json"), py::arg("rho_grid"), py::arg("threads") = 1);
  m.def(
      "pod_vs_snr",
      [](const std::string& scenario_json, const std::vector<double>& snr_grid, std::size_t threads) {
        const ScenarioConfig cfg = scenario(scenario_json);
        py::gil_scoped_release release;
        return to_json(pod_vs_snr(cfg, snr_grid, {resolve_threads(threads)})).dump();
      },
      py::arg("scenario_json"), py::arg("snr_grid"), py::arg("threads") = 1);
}
