#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "moe/baselines.hpp"
#include "moe/simulation.hpp"
#include "oracles.hpp"

namespace moe {
namespace {

std::vector<double> random_descending(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::vector<double> v(m);
  for (double& x : v) x = u(rng);
  std::sort(v.rbegin(), v.rend());
  return v;
}

TEST(LogLikelihood, EqualEigenvaluesGiveZero) {
  const std::vector<double> e(6, 2.5);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(log_likelihood(e, i), 0.0, 1e-15);
}

TEST(LogLikelihood, TwoValues) {
  EXPECT_NEAR(log_likelihood(std::vector<double>{4, 1}, 0), std::log10(2.0 / 2.5), 1e-15);
  EXPECT_NEAR(log_likelihood(std::vector<double>{4, 1}, 0), -0.09691, 1e-5);
}

TEST(LogLikelihood, MatchesNaiveOracle) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto e = random_descending(12, rng);
    for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(log_likelihood(e, i), oracle::log_likelihood(e, i), 1e-10);
  }
}

TEST(LogLikelihood, SurvivesTinyEigenvalues) {
  const std::vector<double> e{1e-200, 1e-250, 1e-300};
  EXPECT_TRUE(std::isfinite(log_likelihood(e, 0)));
  EXPECT_THROW((void)log_likelihood(e, 3), std::out_of_range);
}

TEST(CriterionCurve, MatchesNaiveFormula) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto e = random_descending(3 + static_cast<std::size_t>(rep), rng);
    const double n = 10.0 + rep * 7.0;
    const auto in = make_ic_input(e, n);
    const auto a = aic_curve(in), m = mdl_curve(in);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double wa = oracle::aic(e, n, i), wm = oracle::mdl(e, n, i);
      EXPECT_NEAR(a[i], wa, 1e-8 * std::max(1.0, std::abs(wa)));
      EXPECT_NEAR(m[i], wm, 1e-8 * std::max(1.0, std::abs(wm)));
    }
  }
}

TEST(CriterionCurve, ZeroPenaltyAtIndexZero) {
  const std::vector<double> e{5, 3, 2, 1};
  const auto in = make_ic_input(e, 50);
  EXPECT_NEAR(aic_curve(in)[0], -2.0 * 50 * 4 * log_likelihood(e, 0), 1e-12);
}

TEST(CriterionCurve, EqualEigenvaluesSelectZero) {
  const auto in = make_ic_input(std::vector<double>(8, 1.0), 100);
  EXPECT_EQ(argmin_order(aic_curve(in)), 0u);
  EXPECT_EQ(argmin_order(mdl_curve(in)), 0u);
}

TEST(CriterionCurve, ArgminIsScaleInvariant) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto e = random_descending(10, rng);
    for (InformationCriterion kind : {InformationCriterion::Aic, InformationCriterion::Mdl}) {
      const std::size_t base = argmin_order(criterion_curve(make_ic_input(e, 40), kind));
      for (double c : {1e-6, 1e6}) {
        std::vector<double> s = e;
        for (double& v : s) v *= c;
        EXPECT_EQ(argmin_order(criterion_curve(make_ic_input(s, 40), kind)), base);
      }
    }
  }
}

TEST(CriterionCurve, CovarianceSimulationMatchesExhaustiveArgmin) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = oracle::random_matrix(10, 5, rng);
    const Matrix s = oracle::random_matrix(5, 100, rng);
    const Matrix x = a * s + 0.3 * oracle::random_matrix(10, 100, rng);
    const Matrix cov = x * x.transpose() / 100.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    std::vector<double> e(10);
    for (int k = 0; k < 10; ++k) e[static_cast<std::size_t>(k)] = es.eigenvalues()(9 - k);
    std::vector<double> naive(10);
    for (std::size_t i = 0; i < 10; ++i) naive[i] = oracle::aic(e, 100, i);
    EXPECT_EQ(argmin_order(aic_curve(make_ic_input(e, 100))), oracle::argmin(naive));
    EXPECT_EQ(argmin_order(aic_curve(make_ic_input(e, 100))), 5u);
  }
}

TEST(ArgminOrder, TiesGoToSmallestIndex) {
  EXPECT_EQ(argmin_order(std::vector<double>{3, 1, 1, 2}), 1u);
  EXPECT_THROW((void)argmin_order(std::vector<double>{}), std::invalid_argument);
}

TEST(MakeIcInput, ValidatesAndClamps) {
  const auto in = make_ic_input({2, 1, 0}, 3);
  EXPECT_EQ(in.eigenvalues.back(), kEigenvalueFloor);
  EXPECT_THROW((void)make_ic_input({1, 2}, 3), std::invalid_argument);
  EXPECT_THROW((void)make_ic_input({}, 3), std::invalid_argument);
  EXPECT_THROW((void)make_ic_input({1}, 0.5), std::invalid_argument);
}

TEST(ClassicalMode, LargestDimensionFirstOnTies) {
  EXPECT_EQ(classical_mode(std::vector<std::size_t>{78, 1000, 102}), 1u);
  EXPECT_EQ(classical_mode(std::vector<std::size_t>{5, 5, 5}), 0u);
}

TEST(ClassicalMoe, UsesLargestModeEigenvalueCount) {
  std::mt19937_64 rng(5);
  const DenseTensor t = oracle::random_tensor({78, 1000, 102}, rng);
  const RankEstimate r = classical_moe(t, InformationCriterion::Mdl);
  EXPECT_EQ(r.criterion.size(), 1000u);
  EXPECT_EQ(r.method, Method::Mdl);
}

TEST(ClassicalMoe, PlantedMatrixComponents) {
  std::size_t hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    FactorSet f;
    f.factors = {Matrix(10, 3), Matrix(200, 3)};
    for (Matrix& m : f.factors) fill_standard_normal({m.data(), static_cast<std::size_t>(m.size())}, rng);
    const NoisyTensor x = add_noise_at_snr(cp_construct(f), {20.0}, rng);
    hits += classical_moe(x.noisy, InformationCriterion::Aic).rank == 3 ? 1 : 0;
  }
  EXPECT_GE(hits, 95u);
}

TEST(NdMoe, EqualGlobalEigenvaluesGiveRankZero) {
  GlobalEigenvalueProfile p;
  p.values.assign(5, 0.2);
  p.logs.assign(5, std::log(0.2));
  const std::vector<std::size_t> dims{5, 6, 7};
  const RankEstimate a = nd_moe(p, dims, InformationCriterion::Aic);
  EXPECT_EQ(a.rank, 0u);
  EXPECT_EQ(a.method, Method::NdAic);
  const RankEstimate b = nd_moe(p, dims, InformationCriterion::Aic);
  EXPECT_EQ(a.criterion, b.criterion);
}

TEST(NdMoe, SnapshotCountIsSmallestDimension) {
  EXPECT_EQ(nd_snapshots(std::vector<std::size_t>{25, 30, 35}), 25.0);
}

TEST(NdMoe, PlantedRankAtHighSnr) {
  ScenarioConfig cfg;
  cfg.dims = {25, 30, 35};
  cfg.snr_db = 20;
  cfg.methods = {Method::NdAic, Method::NdMdl};
  std::size_t hits = 0;
  for (std::size_t k = 0; k < 100; ++k) hits += run_trial(cfg, k).at(Method::NdAic) == 5 ? 1 : 0;
  EXPECT_GE(hits, 90u);
}

TEST(Baselines, AllMethodsAgreeAtHighSnr) {
  ScenarioConfig cfg;
  cfg.dims = {30, 40, 50};
  cfg.snr_db = 25;
  cfg.methods = all_methods();
  std::map<Method, std::size_t> hits;
  for (std::size_t k = 0; k < 50; ++k)
    for (const auto& [m, r] : run_trial(cfg, k)) hits[m] += r == 5 ? 1 : 0;
  for (const auto& [m, h] : hits) EXPECT_GE(h, 45u) << to_string(m);
}

}  // namespace
}  // namespace moe
