#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "moe/baselines.hpp"
#include "moe/cp_als.hpp"
#include "moe/estimators.hpp"
#include "moe/simulation.hpp"
#include "moe/spectra.hpp"
#include "moe/tensor.hpp"

namespace moe {

// TNSR layout: "TNSR", u32 version (1), u8 order, order x u64 dims, then the
// f64 values in last-index-fastest order. All integers and floats are
// little-endian.
inline constexpr std::uint32_t kTnsrVersion = 1;

void write_tnsr(std::ostream& out, const DenseTensor& t);
void write_tnsr(const std::filesystem::path& path, const DenseTensor& t);
/// FormatError on bad magic, version, order, dims, truncation or trailing bytes.
[[nodiscard]] DenseTensor read_tnsr(std::istream& in);
[[nodiscard]] DenseTensor read_tnsr(const std::filesystem::path& path);

/// Shortest round-trip text with at most 17 significant digits, '.' decimal point.
[[nodiscard]] std::string format_double(double v);

void write_spectra_csv(std::ostream& out, const GlobalEigenvalueProfile& profile);
void write_trace_csv(std::ostream& out, const PesdrTrace& trace);
void write_criterion_csv(std::ostream& out, std::span<const double> curve);
void write_report_csv(std::ostream& out, const MonteCarloReport& report);
/// Rows M_d, one column per component.
void write_matrix_csv(std::ostream& out, const Matrix& m);

/// ConfigError on missing or ill-typed fields or an invalid model (see
/// ScenarioConfig::validate_model). Accepts {dims, rank, correlation,
/// snr_db | snr_grid, rho | rho_grid, trials, seed, methods, epsilon}.
[[nodiscard]] ScenarioConfig scenario_from_json(const nlohmann::json& j);
[[nodiscard]] ScenarioConfig load_scenario(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const ScenarioConfig& cfg);
[[nodiscard]] nlohmann::json to_json(const MonteCarloReport& report);
[[nodiscard]] nlohmann::json summary_json(const RankEstimate& est, const LargeConfig& cfg);

}  // namespace moe
