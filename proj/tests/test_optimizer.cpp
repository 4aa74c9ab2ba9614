#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "kfmc/optimizer.hpp"

using kfmc::Estimate;
using kfmc::GammaScan;

namespace {

kfmc::GammaObjective synthetic(std::function<double(double)> f, double err = 0.0, double noise = 0.0) {
  return [f, err, noise](double g, std::uint64_t stream) {
    Estimate e;
    e.gamma = g;
    kfmc::Rng rng(stream);
    e.gamma_hat = f(g) + noise * (rng.uniform() - 0.5);
    e.gamma_hat_err = err;
    e.i_hat = g;
    return e;
  };
}

}  // namespace

TEST(ScanGamma, ValidatesGrid) {
  auto obj = synthetic([](double g) { return g; });
  EXPECT_THROW(kfmc::scan_gamma({1.0, 2.0}, obj), kfmc::InvalidParameter);
  EXPECT_THROW(kfmc::scan_gamma({1.0, 3.0, 2.0}, obj), kfmc::InvalidParameter);
  EXPECT_THROW(kfmc::scan_gamma({-1.0, 1.0, 2.0}, obj), kfmc::InvalidParameter);
}

TEST(ScanGamma, MonotoneObjectiveGivesEdgeMinimum) {
  const auto scan = kfmc::scan_gamma(kfmc::log_grid(0.1, 10, 8), synthetic([](double g) { return g; }, 0.01));
  EXPECT_FALSE(scan.interior);
  EXPECT_DOUBLE_EQ(scan.gamma_star, 0.1);
  EXPECT_THROW(kfmc::refine_gamma(scan, synthetic([](double g) { return g; })), kfmc::InvalidParameter);
}

TEST(ScanGamma, InteriorMinimumNeedsTwoSigmaMargin) {
  auto parabola = [](double g) { return (std::log(g) - std::log(2.0)) * (std::log(g) - std::log(2.0)); };
  const auto grid = kfmc::log_grid(0.5, 8.0, 9);
  EXPECT_TRUE(kfmc::scan_gamma(grid, synthetic(parabola, 0.01)).interior);
  // Endpoints sit ~1.92 above the minimum; error bars of 1 swamp that.
  EXPECT_FALSE(kfmc::scan_gamma(grid, synthetic(parabola, 1.0)).interior);
}

TEST(ScanGamma, AbortReportsGamma) {
  kfmc::GammaObjective bad = [](double g, std::uint64_t) -> Estimate {
    if (g > 1.5) throw kfmc::Singularity("boom");
    return Estimate{};
  };
  try {
    kfmc::scan_gamma({1.0, 2.0, 3.0}, bad);
    FAIL() << "expected abort";
  } catch (const kfmc::Error& e) {
    EXPECT_NE(std::string(e.what()).find("gamma=2"), std::string::npos) << e.what();
  }
}

TEST(RefineGamma, GoldenSectionShrinksBracket) {
  auto f = [](double g) { return std::pow(std::log(g) - std::log(3.3), 2); };
  const auto scan = kfmc::scan_gamma(kfmc::log_grid(0.5, 20.0, 7), synthetic(f));
  ASSERT_TRUE(scan.interior);
  const double width0 = std::log(scan.bracket_hi / scan.bracket_lo);
  kfmc::RefineOptions opt;
  opt.tolerance = 1e-3;
  opt.probe_budget = 10;
  const auto refined = kfmc::refine_gamma(scan, synthetic(f), opt);
  EXPECT_EQ(refined.probes, 10u);
  EXPECT_FALSE(refined.noise_limited);
  const double width = std::log(refined.bracket_hi / refined.bracket_lo);
  // Two probes set up the first reduction; each later probe shrinks by 0.618.
  EXPECT_NEAR(width / width0, std::pow(0.6180339887498949, 9), 1e-9);
  EXPECT_NEAR(refined.gamma_star, 3.3, 3.3 * width);
  EXPECT_GE(refined.gamma_star, refined.bracket_lo);
  EXPECT_LE(refined.gamma_star, refined.bracket_hi);
}

TEST(RefineGamma, ConvergesToTolerance) {
  auto f = [](double g) { return std::pow(std::log(g) - std::log(0.07), 2); };
  const auto scan = kfmc::scan_gamma(kfmc::log_grid(0.01, 1.0, 9), synthetic(f));
  kfmc::RefineOptions opt;
  opt.tolerance = 0.01;
  opt.probe_budget = 100;
  const auto refined = kfmc::refine_gamma(scan, synthetic(f), opt);
  EXPECT_LE(std::log(refined.bracket_hi / refined.bracket_lo), 0.01);
  EXPECT_NEAR(std::log(refined.gamma_star / 0.07), 0.0, 0.01);
  for (std::size_t i = 1; i < refined.points.size(); ++i)
    EXPECT_LE(refined.points[i - 1].gamma, refined.points[i].gamma);
}

TEST(RefineGamma, WideToleranceReturnsImmediately) {
  auto f = [](double g) { return std::pow(g - 2.0, 2); };
  const auto scan = kfmc::scan_gamma({0.5, 1.0, 2.0, 4.0, 8.0}, synthetic(f));
  kfmc::RefineOptions opt;
  opt.tolerance = 10.0;
  opt.evaluate_star = false;
  const auto refined = kfmc::refine_gamma(scan, synthetic(f), opt);
  EXPECT_EQ(refined.probes, 0u);
  EXPECT_EQ(refined.points.size(), scan.points.size());
  EXPECT_NEAR(refined.gamma_star, 2.0, 1e-12);  // geometric midpoint of [1, 4]
}

TEST(RefineGamma, NoisyFlatObjectiveIsNoiseLimited) {
  auto flat = [](double g) { return g == 1.0 ? -10.0 : 0.0; };
  const auto scan = kfmc::scan_gamma({0.25, 0.5, 1.0, 2.0, 4.0}, synthetic(flat, 0.5));
  ASSERT_TRUE(scan.interior);
  const auto refined = kfmc::refine_gamma(scan, synthetic([](double) { return 0.0; }, 0.5, 0.1));
  EXPECT_TRUE(refined.noise_limited);
  EXPECT_EQ(refined.probes, 2u);
  EXPECT_NEAR(refined.gamma_star, 1.0, 1e-12);
}

TEST(ScanGamma, ZeroGammaPointIsPureCoulomb) {
  const auto base = kfmc::make_gas_params(10, 0.2, 0.0);
  kfmc::ChainConfig cfg;
  cfg.n_sweeps_burnin = 50;
  cfg.n_sweeps_measure = 200;
  cfg.block_size = 200;
  const auto scan = kfmc::scan_gamma(base, {0.0, 5.0, 20.0}, cfg);
  EXPECT_EQ(scan.points[0].estimate.i_hat, 0.0);
  EXPECT_DOUBLE_EQ(scan.points[0].gamma_hat(), 10 * scan.points[0].estimate.c_hat);
}

TEST(ScanGamma, ThreadCountDoesNotChangeResults) {
  const auto base = kfmc::make_gas_params(10, 0.2, 0.0);
  kfmc::ChainConfig cfg;
  cfg.n_sweeps_burnin = 50;
  cfg.n_sweeps_measure = 200;
  cfg.block_size = 200;
  const auto grid = kfmc::default_gamma_grid(0.2);
  const auto a = kfmc::scan_gamma(base, grid, cfg, 1);
  const auto b = kfmc::scan_gamma(base, grid, cfg, 4);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].estimate.gamma_hat, b.points[i].estimate.gamma_hat);
    EXPECT_EQ(a.points[i].estimate.i_err, b.points[i].estimate.i_err);
  }
  EXPECT_EQ(a.gamma_star, b.gamma_star);
}

TEST(ScanGamma, MinimiserConsistentUnderNoise) {
  const auto base = kfmc::make_gas_params(20, 0.2, 0.0);
  kfmc::ChainConfig cfg;
  cfg.seed = 17;
  cfg.n_sweeps_burnin = 200;
  cfg.n_sweeps_measure = 1500;
  const auto scan = kfmc::scan_gamma(base, kfmc::default_gamma_grid(0.2), cfg);
  for (const auto& p : scan.points)
    EXPECT_LE(scan.gamma_hat_min, p.gamma_hat() + 2 * std::hypot(p.error(), scan.gamma_hat_min_err));
}

TEST(DefaultGrid, TwelveLogSpacedPoints) {
  const auto g = kfmc::default_gamma_grid(0.2);
  ASSERT_EQ(g.size(), 12u);
  const double scale = std::pow(0.2, 7.0 / 3.0);
  EXPECT_NEAR(g.front() * scale, 0.01, 1e-15);
  EXPECT_NEAR(g.back() * scale, 2.0, 1e-13);
  for (std::size_t i = 2; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
}
