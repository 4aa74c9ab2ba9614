#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kfmc/model.hpp"
#include "kfmc/sampler.hpp"

using kfmc::ChainConfig;
using kfmc::ChainState;
using kfmc::GasParams;

TEST(InitConfiguration, DeterministicGivenSeed) {
  const auto p = kfmc::make_gas_params(10, 0.2, 1.0);
  const auto a = kfmc::init_configuration(p, 42);
  const auto b = kfmc::init_configuration(p, 42);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_NE(a.positions, kfmc::init_configuration(p, 43).positions);
}

TEST(InitConfiguration, InsideBox) {
  const auto p = kfmc::make_gas_params(100, 0.2, 1.0);
  EXPECT_NEAR(p.box.length, 7.93700525984099737, 1e-14);
  const auto c = kfmc::init_configuration(p, 9);
  ASSERT_EQ(c.size(), 100u);
  for (const auto& r : c.positions)
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(r[k], 0.0);
      EXPECT_LT(r[k], p.box.length);
    }
}

TEST(InitConfiguration, TwoElectronsDistinct) {
  const auto p = kfmc::make_gas_params(2, 1.0, 1.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto c = kfmc::init_configuration(p, s);
    EXPECT_GT(kfmc::image_distance(c[0], c[1], p.box), kfmc::kHardCore);
  }
}

TEST(MetropolisStep, ZeroGammaAlwaysAccepts) {
  const auto p = kfmc::make_gas_params(10, 0.2, 0.0);
  ChainConfig cfg;
  auto state = kfmc::make_chain(p, cfg);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(kfmc::metropolis_step(state, p));
}

TEST(MetropolisStep, CachedRatioMatchesDirectEvaluation) {
  const auto p = kfmc::make_gas_params(15, 0.2, 6.0, 2.5);
  ChainConfig cfg;
  cfg.seed = 3;
  auto state = kfmc::make_chain(p, cfg);
  kfmc::Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = rng.index(p.n_electrons);
    const kfmc::Vec3 trial = kfmc::wrap(
        state.config()[k] + kfmc::Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}, p.box);
    const double direct = kfmc::log_f_ratio(state.config(), k, trial, p);
    const double cached = state.trial_log_ratio(k, trial, p);
    EXPECT_NEAR(cached, direct, 1e-10 * (1 + std::abs(direct)));
    kfmc::metropolis_step(state, p);
  }
}

TEST(MetropolisStep, RunningTotalsTrackDirectSummands) {
  const auto p = kfmc::make_gas_params(20, 0.2, 8.0);
  auto state = kfmc::make_chain(p, ChainConfig{});
  for (int i = 0; i < 3000; ++i) {
    kfmc::metropolis_step(state, p);
    if (i % 97 == 0) {
      EXPECT_NEAR(state.fisher(p), kfmc::fisher_summand(state.config(), p), 1e-9 * (1 + state.fisher(p)));
      EXPECT_NEAR(state.coulomb(), kfmc::coulomb_summand(state.config(), p), 1e-11 * state.coulomb());
    }
  }
}

TEST(MetropolisStep, ReproducibleTrajectories) {
  const auto p = kfmc::make_gas_params(12, 0.2, 10.0);
  ChainConfig cfg;
  cfg.seed = 1234;
  auto a = kfmc::make_chain(p, cfg);
  auto b = kfmc::make_chain(p, cfg);
  for (int i = 0; i < 5000; ++i) ASSERT_EQ(kfmc::metropolis_step(a, p), kfmc::metropolis_step(b, p));
  EXPECT_EQ(a.config().positions, b.config().positions);
  EXPECT_EQ(a.accepted_moves(), b.accepted_moves());
}

TEST(RunSweep, CountersAdvanceByN) {
  const auto p = kfmc::make_gas_params(10, 0.2, 0.0);
  auto state = kfmc::make_chain(p, ChainConfig{});
  kfmc::run_sweep(state, p);
  EXPECT_EQ(state.attempted_moves(), 10u);
  EXPECT_EQ(state.accepted_moves(), 10u);

  const auto q = kfmc::make_gas_params(10, 0.2, 50.0);
  auto s2 = kfmc::make_chain(q, ChainConfig{});
  kfmc::run_sweep(s2, q);
  EXPECT_EQ(s2.attempted_moves(), 10u);
  EXPECT_LE(s2.accepted_moves(), s2.attempted_moves());
}

TEST(RunSweep, TwoSweepsEqualTwoNSteps) {
  const auto p = kfmc::make_gas_params(10, 0.2, 5.0);
  ChainConfig cfg;
  cfg.seed = 99;
  auto a = kfmc::make_chain(p, cfg);
  auto b = kfmc::make_chain(p, cfg);
  kfmc::run_sweep(a, p);
  kfmc::run_sweep(a, p);
  for (int i = 0; i < 20; ++i) kfmc::metropolis_step(b, p);
  EXPECT_EQ(a.config().positions, b.config().positions);
  EXPECT_EQ(a.accepted_moves(), b.accepted_moves());
  EXPECT_TRUE(a.rng() == b.rng());
}

TEST(TuneStepSize, Rules) {
  const kfmc::Box box{10.0};
  EXPECT_NEAR(kfmc::tuned_displacement(1.0, 0.9, 0.5, box), 1.1, 1e-15);
  EXPECT_NEAR(kfmc::tuned_displacement(1.0, 0.1, 0.5, box), 0.9, 1e-15);
  EXPECT_EQ(kfmc::tuned_displacement(5.0, 0.9, 0.5, box), 5.0);
  EXPECT_EQ(kfmc::tuned_displacement(kfmc::kMinDisplacement, 0.0, 0.5, box), kfmc::kMinDisplacement);
  EXPECT_EQ(kfmc::tuned_displacement(1.0, 0.5, 0.5, box), 1.0);
}

TEST(TuneStepSize, UsesWindowAcceptance) {
  const auto p = kfmc::make_gas_params(10, 0.2, 0.0);
  ChainConfig cfg;
  cfg.max_displacement = 0.5;
  auto state = kfmc::make_chain(p, cfg);
  kfmc::run_sweep(state, p);  // gamma = 0: acceptance 1
  EXPECT_NEAR(kfmc::tune_step_size(state, cfg, p.box), 0.55, 1e-15);
  EXPECT_EQ(state.window_attempted(), 0u);
}

TEST(ChainConfigValidation, RejectsBadValues) {
  const auto p = kfmc::make_gas_params(10, 1.0, 1.0);
  ChainConfig cfg;
  cfg.max_displacement = p.box.half();
  EXPECT_THROW(kfmc::make_chain(p, cfg), kfmc::InvalidParameter);
  cfg = ChainConfig{};
  cfg.n_sweeps_measure = 0;
  EXPECT_THROW(kfmc::validate(cfg, p.box), kfmc::InvalidParameter);
  cfg = ChainConfig{};
  cfg.target_acceptance = 1.0;
  EXPECT_THROW(kfmc::validate(cfg, p.box), kfmc::InvalidParameter);
}

TEST(Equilibrate, ConservesParticleNumberAndBox) {
  const auto p = kfmc::make_gas_params(25, 0.04, 500.0);
  ChainConfig cfg;
  cfg.n_sweeps_burnin = 200;
  auto state = kfmc::make_chain(p, cfg);
  kfmc::equilibrate(state, p, cfg);
  ASSERT_EQ(state.config().size(), 25u);
  for (const auto& r : state.config().positions)
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(r[k], 0.0);
      EXPECT_LT(r[k], p.box.length);
    }
  EXPECT_GE(state.max_displacement(), kfmc::kMinDisplacement);
  EXPECT_LE(state.max_displacement(), p.box.half());
}

// gamma = 0 leaves the uniform distribution invariant: a coordinate histogram
// must be flat within 4 sigma binomial bands.
TEST(Stationarity, ZeroGammaIsUniform) {
  const auto p = kfmc::make_gas_params(4, 0.2, 0.0);
  ChainConfig cfg;
  cfg.seed = 5;
  cfg.max_displacement = 0.45 * p.box.length;
  auto state = kfmc::make_chain(p, cfg);
  constexpr int kBins = 20;
  std::vector<int> hist(kBins, 0);
  const int samples = 40000;
  for (int s = 0; s < samples; ++s) {
    for (int k = 0; k < 5; ++k) kfmc::run_sweep(state, p);
    const double x = state.config()[0].x / p.box.length;
    ++hist[static_cast<int>(x * kBins)];
  }
  const double expected = static_cast<double>(samples) / kBins;
  const double sigma = std::sqrt(samples * (1.0 / kBins) * (1 - 1.0 / kBins));
  for (int b = 0; b < kBins; ++b) EXPECT_LT(std::abs(hist[b] - expected), 4 * sigma) << "bin " << b;
}
