#include "moe/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>

#include "moe/error.hpp"

namespace moe {
namespace {

constexpr std::array<char, 4> kMagic{'T', 'N', 'S', 'R'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t k = 0; k < sizeof(U); ++k) bytes[k] = static_cast<char>((value >> (8 * k)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(const unsigned char* p) {
  U value = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) value |= static_cast<U>(p[k]) << (8 * k);
  return value;
}

class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : bytes_(std::istreambuf_iterator<char>(in), {}) {}

  const unsigned char* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated TNSR file while reading ") + what);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += n;
    return p;
  }
  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("scenario is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario field '") + key + "' has the wrong type: " + e.what());
  }
}

template <typename T>
void optional_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario field '") + key + "' has the wrong type: " + e.what());
  }
}

std::size_t positive_count(const nlohmann::json& value, const char* key) {
  if (!value.is_number_integer() || value.get<long long>() < 0)
    throw ConfigError(std::string("scenario field '") + key + "' must be a non-negative integer");
  return value.get<std::size_t>();
}

}  // namespace

void write_tnsr(std::ostream& out, const DenseTensor& t) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kTnsrVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.order()));
  for (std::size_t m : t.dims()) put_le<std::uint64_t>(out, m);
  for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw FormatError("failed writing TNSR stream");
}

void write_tnsr(const std::filesystem::path& path, const DenseTensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_tnsr(out, t);
}

DenseTensor read_tnsr(std::istream& in) {
  ByteReader r(in);
  const unsigned char* magic = r.take(4, "magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), magic, [](char a, unsigned char b) { return a == static_cast<char>(b); }))
    throw FormatError("bad TNSR magic");
  const auto version = get_le<std::uint32_t>(r.take(4, "version"));
  if (version != kTnsrVersion) throw FormatError("unsupported TNSR version " + std::to_string(version));
  const auto order = static_cast<std::size_t>(*r.take(1, "order"));
  if (order < 2) throw FormatError("TNSR order must be at least 2, got " + std::to_string(order));

  std::vector<std::size_t> dims(order);
  std::size_t total = 1;
  for (std::size_t d = 0; d < order; ++d) {
    const auto m = get_le<std::uint64_t>(r.take(8, "dims"));
    if (m == 0) throw FormatError("TNSR dimension of size zero");
    if (m > std::numeric_limits<std::size_t>::max() / total) throw FormatError("TNSR dimensions overflow");
    dims[d] = static_cast<std::size_t>(m);
    total *= dims[d];
  }
  if (r.remaining() / 8 < total) throw FormatError("truncated TNSR file while reading values");
  std::vector<double> data(total);
  const unsigned char* p = r.take(total * 8, "values");
  for (std::size_t k = 0; k < total; ++k) data[k] = std::bit_cast<double>(get_le<std::uint64_t>(p + 8 * k));
  if (r.remaining() != 0) throw FormatError("trailing bytes after TNSR values");
  return DenseTensor(std::move(dims), std::move(data));
}

DenseTensor read_tnsr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_tnsr(in);
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void write_spectra_csv(std::ostream& out, const GlobalEigenvalueProfile& profile) {
  out << "index,value,log\n";
  for (std::size_t i = 0; i < profile.size(); ++i)
    out << (i + 1) << ',' << format_double(profile.values[i]) << ',' << format_double(profile.logs[i]) << '\n';
}

void write_trace_csv(std::ostream& out, const PesdrTrace& trace) {
  out << "i,a1,a2,lambda,lambda_hat,delta,delta_rel,sigma,pesdr,pesdr_pf,suppressed\n";
  for (const PesdrEntry& e : trace.entries) {
    out << e.index << ',' << format_double(e.slope) << ',' << format_double(e.intercept) << ','
        << format_double(e.lambda) << ',' << format_double(e.lambda_hat) << ',' << format_double(e.abs_error) << ','
        << format_double(e.rel_error) << ',' << format_double(e.residual_std) << ',' << format_double(e.pesdr) << ','
        << format_double(e.pesdr_pf) << ',' << (e.suppressed ? 1 : 0) << '\n';
  }
}

void write_criterion_csv(std::ostream& out, std::span<const double> curve) {
  out << "i,value\n";
  for (std::size_t i = 0; i < curve.size(); ++i) out << i << ',' << format_double(curve[i]) << '\n';
}

void write_report_csv(std::ostream& out, const MonteCarloReport& report) {
  out << "method,grid_value,trials,n_fp,n_fn,n_correct,p_fp,p_fn,pod\n";
  for (const MonteCarloRow& row : report.rows) {
    out << to_string(row.method) << ',' << format_double(row.grid_value) << ',' << row.trials << ',' << row.n_fp << ','
        << row.n_fn << ',' << row.n_correct << ',' << format_double(row.p_fp) << ',' << format_double(row.p_fn) << ','
        << format_double(row.pod) << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  ScenarioConfig cfg;

  const nlohmann::json& dims = j.contains("dims") ? j.at("dims") : throw ConfigError("scenario is missing 'dims'");
  if (!dims.is_array()) throw ConfigError("scenario field 'dims' must be an array");
  for (const auto& m : dims) cfg.dims.push_back(positive_count(m, "dims"));
  if (!j.contains("rank")) throw ConfigError("scenario is missing 'rank'");
  cfg.rank = positive_count(j.at("rank"), "rank");

  optional_field(j, "correlation", cfg.correlation);
  optional_field(j, "snr_db", cfg.snr_db);
  optional_field(j, "snr_grid", cfg.snr_grid);
  optional_field(j, "rho", cfg.rho);
  optional_field(j, "rho_grid", cfg.rho_grid);
  optional_field(j, "epsilon", cfg.epsilon);
  if (j.contains("trials")) cfg.trials = positive_count(j.at("trials"), "trials");
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
      throw ConfigError("scenario field 'seed' must be a non-negative integer");
    cfg.master_seed = s.get<std::uint64_t>();
  }
  if (j.contains("methods")) {
    const auto tags = required<std::vector<std::string>>(j, "methods");
    cfg.methods.clear();
    for (const std::string& tag : tags) {
      const auto m = parse_method(tag);
      if (!m) throw ConfigError("unknown method '" + tag + "'");
      cfg.methods.push_back(*m);
    }
  }
  try {
    cfg.validate_model();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : cfg.methods) methods.push_back(std::string(to_string(m)));
  nlohmann::json j{{"dims", cfg.dims},       {"rank", cfg.rank}, {"correlation", cfg.correlation_or_zero()},
                   {"snr_db", cfg.snr_db},   {"trials", cfg.trials}, {"seed", cfg.master_seed},
                   {"methods", methods},     {"rho", cfg.rho},   {"epsilon", cfg.epsilon}};
  if (!cfg.rho_grid.empty()) j["rho_grid"] = cfg.rho_grid;
  if (!cfg.snr_grid.empty()) j["snr_grid"] = cfg.snr_grid;
  return j;
}

nlohmann::json to_json(const MonteCarloReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const MonteCarloRow& row : report.rows) {
    rows.push_back({{"method", std::string(to_string(row.method))},
                    {"grid_value", row.grid_value},
                    {"trials", row.trials},
                    {"n_fp", row.n_fp},
                    {"n_fn", row.n_fn},
                    {"n_correct", row.n_correct},
                    {"p_fp", row.p_fp},
                    {"p_fn", row.p_fn},
                    {"pod", row.pod}});
  }
  return {{"kind", report.kind},
          {"trials", report.trials},
          {"master_seed", report.master_seed},
          {"scenario", to_json(report.scenario)},
          {"rows", rows}};
}

nlohmann::json summary_json(const RankEstimate& est, const LargeConfig& cfg) {
  return {{"method", std::string(to_string(est.method))},
          {"rank", est.rank},
          {"defaulted", est.defaulted},
          {"rho", cfg.rho},
          {"epsilon", cfg.epsilon}};
}

}  // namespace moe
