#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "moe/error.hpp"
#include "moe/io.hpp"
#include "oracles.hpp"

namespace moe {
namespace {

std::string encode(const DenseTensor& t) {
  std::ostringstream out(std::ios::binary);
  write_tnsr(out, t);
  return out.str();
}

DenseTensor decode(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_tnsr(in);
}

TEST(Tnsr, LayoutIsBitExact) {
  const DenseTensor t({1, 2}, {1.0, -2.5});
  const std::string b = encode(t);
  ASSERT_EQ(b.size(), 4u + 4 + 1 + 2 * 8 + 2 * 8);
  EXPECT_EQ(b.substr(0, 4), "TNSR");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 0);
  EXPECT_EQ(b[8], 2);
  EXPECT_EQ(b[9], 1);
  EXPECT_EQ(b[17], 2);
  double v = 0;
  std::memcpy(&v, b.data() + 33, 8);  // host is little-endian here
  EXPECT_EQ(v, -2.5);
}

TEST(Tnsr, RoundTrip) {
  std::mt19937_64 rng(1);
  DenseTensor t = oracle::random_tensor({3, 1, 4, 2}, rng);
  t.data()[0] = std::numeric_limits<double>::denorm_min();
  t.data()[1] = -0.0;
  EXPECT_EQ(decode(encode(t)), t);
  EXPECT_EQ(encode(decode(encode(t))), encode(t));
}

TEST(Tnsr, RejectsMalformedInput) {
  const std::string good = encode(DenseTensor({2, 2}, {1, 2, 3, 4}));
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW((void)decode(bad_magic), FormatError);
  std::string bad_version = good;
  bad_version[4] = 2;
  EXPECT_THROW((void)decode(bad_version), FormatError);
  std::string low_order = good;
  low_order[8] = 1;
  EXPECT_THROW((void)decode(low_order), FormatError);
  std::string zero_dim = good;
  zero_dim[9] = 0;
  EXPECT_THROW((void)decode(zero_dim), FormatError);
  EXPECT_THROW((void)decode(good.substr(0, good.size() - 1)), FormatError);
  EXPECT_THROW((void)decode(good.substr(0, 10)), FormatError);
  EXPECT_THROW((void)decode(good + "x"), FormatError);
  EXPECT_THROW((void)decode(""), FormatError);
  std::string huge = good;
  for (int k = 9; k < 25; ++k) huge[static_cast<std::size_t>(k)] = static_cast<char>(0xFF);
  EXPECT_THROW((void)decode(huge), FormatError);
}

TEST(Tnsr, MissingFile) {
  EXPECT_THROW((void)read_tnsr(std::filesystem::path("/nonexistent/x.tnsr")), FormatError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(1.0), "1");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(third)), third);
}

TEST(Csv, Headers) {
  std::ostringstream s, t, c, r;
  GlobalEigenvalueProfile p;
  p.values = {0.5};
  p.logs = {-0.69};
  write_spectra_csv(s, p);
  EXPECT_EQ(s.str(), "index,value,log\n1,0.5,-0.68999999999999995\n");
  write_trace_csv(t, PesdrTrace{});
  EXPECT_EQ(t.str(), "i,a1,a2,lambda,lambda_hat,delta,delta_rel,sigma,pesdr,pesdr_pf,suppressed\n");
  write_criterion_csv(c, std::vector<double>{2.0});
  EXPECT_EQ(c.str(), "i,value\n0,2\n");
  write_report_csv(r, MonteCarloReport{});
  EXPECT_EQ(r.str(), "method,grid_value,trials,n_fp,n_fn,n_correct,p_fp,p_fn,pod\n");
}

TEST(Scenario, ParsesAllFields) {
  const auto j = nlohmann::json::parse(R"({"dims":[10,11,12],"rank":3,"correlation":[0.1,0.2,0.3],
    "snr_db":-2.5,"trials":7,"seed":99,"methods":["large","nd-mdl"],"rho":0.7,"rho_grid":[0.5,0.6],
    "snr_grid":[-4,0],"epsilon":0.002})");
  const ScenarioConfig cfg = scenario_from_json(j);
  EXPECT_EQ(cfg.dims, (std::vector<std::size_t>{10, 11, 12}));
  EXPECT_EQ(cfg.rank, 3u);
  EXPECT_EQ(cfg.correlation.size(), 3u);
  EXPECT_EQ(cfg.snr_db, -2.5);
  EXPECT_EQ(cfg.trials, 7u);
  EXPECT_EQ(cfg.master_seed, 99u);
  EXPECT_EQ(cfg.methods, (std::vector<Method>{Method::Large, Method::NdMdl}));
  EXPECT_EQ(cfg.rho, 0.7);
  EXPECT_EQ(cfg.epsilon, 0.002);
  EXPECT_EQ(cfg.rho_grid.size(), 2u);
  EXPECT_EQ(scenario_from_json(to_json(cfg)).dims, cfg.dims);
  EXPECT_EQ(to_json(scenario_from_json(to_json(cfg))), to_json(cfg));
}

TEST(Scenario, RejectsBadInput) {
  for (const char* text : {R"([])", R"({"rank":2})", R"({"dims":[5,5,5]})", R"({"dims":"5","rank":2})",
                           R"({"dims":[5,5,5],"rank":2,"methods":["esprit"]})",
                           R"({"dims":[5,5,5],"rank":9})", R"({"dims":[5,5,5],"rank":2,"seed":-1})",
                           R"({"dims":[5,5,5],"rank":2,"snr_db":"high"})",
                           R"({"dims":[5,5,5],"rank":2,"correlation":[1.2,0,0]})"}) {
    EXPECT_THROW((void)scenario_from_json(nlohmann::json::parse(text)), ConfigError) << text;
  }
  EXPECT_THROW((void)load_scenario("/nonexistent.json"), ConfigError);
}

TEST(Summary, Fields) {
  RankEstimate e;
  e.method = Method::LargePf;
  e.rank = 4;
  const auto j = summary_json(e, LargeConfig{0.8});
  EXPECT_EQ(j.at("method"), "large-pf");
  EXPECT_EQ(j.at("rank"), 4);
  EXPECT_EQ(j.at("defaulted"), false);
  EXPECT_EQ(j.at("rho"), 0.8);
}

}  // namespace
}  // namespace moe
