#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kfmc/estimator.hpp"
#include "kfmc/oracle.hpp"

namespace {

// Integral of 1/r over the unit cube centred on the origin.
const double kCubeInverseR = 3.0 * std::log(2.0 + std::sqrt(3.0)) - std::numbers::pi / 2.0;

kfmc::QuadratureSpec spec(std::size_t k) {
  kfmc::QuadratureSpec s;
  s.points_per_axis = k;
  return s;
}

}  // namespace

TEST(QuadratureN2, ZeroGammaMatchesClosedForm) {
  const auto p = kfmc::make_gas_params(2, 0.2, 0.0);
  const auto q = kfmc::quadrature_n2(p, spec(48));
  EXPECT_EQ(q.i_exact, 0.0);
  const double exact = 0.5 * kCubeInverseR / p.box.length;
  EXPECT_NEAR(q.c_exact, exact, 3 * (q.c_error + q.exclusion_bias_c));
  EXPECT_GT(q.exclusion_bias_c, 0.0);
}

TEST(QuadratureN2, SelfConvergence) {
  const auto p = kfmc::make_gas_params(2, 0.2, 0.5);
  const auto coarse = kfmc::quadrature_n2(p, spec(48));
  const auto fine = kfmc::quadrature_n2(p, spec(96));
  EXPECT_LE(std::abs(coarse.i_exact - fine.i_exact), coarse.i_error);
  EXPECT_LE(std::abs(coarse.c_exact - fine.c_exact), coarse.c_error);
  EXPECT_GT(coarse.i_exact, 0.0);
}

TEST(QuadratureN2, DifferencesShrinkWithResolution) {
  const auto p = kfmc::make_gas_params(2, 0.2, 10.0);
  double prev_i = INFINITY, prev_c = INFINITY;
  for (std::size_t k : {24u, 48u, 96u}) {
    const auto q = kfmc::quadrature_n2(p, spec(k));
    EXPECT_LT(q.i_error, prev_i);
    EXPECT_LT(q.c_error, prev_c);
    prev_i = q.i_error;
    prev_c = q.c_error;
  }
}

TEST(QuadratureN2, DeterministicAndValidated) {
  const auto p = kfmc::make_gas_params(2, 1.0, 0.1);
  const auto a = kfmc::quadrature_n2(p, spec(16)), b = kfmc::quadrature_n2(p, spec(16));
  EXPECT_EQ(a.i_exact, b.i_exact);
  EXPECT_EQ(a.c_exact, b.c_exact);
  EXPECT_THROW(kfmc::quadrature_n2(kfmc::make_gas_params(3, 1.0, 0.1), spec(16)), kfmc::Unsupported);
  EXPECT_THROW(kfmc::quadrature_n2(p, spec(4)), kfmc::InvalidParameter);
}

TEST(QuadratureN2, AgreesWithChain) {
  const auto p = kfmc::make_gas_params(2, 0.2, 10.0);
  const auto q = kfmc::quadrature_n2(p, spec(48));
  kfmc::ChainConfig cfg;
  cfg.seed = 21;
  cfg.n_sweeps_measure = 2000000;
  cfg.block_size = 20000;
  const auto e = kfmc::estimate(p, cfg);
  EXPECT_LE(std::abs(e.i_hat - q.i_exact), 3 * std::hypot(e.i_err, q.i_error));
  EXPECT_LE(std::abs(e.c_hat - q.c_exact), 3 * std::hypot(e.c_err, q.c_error));
}

TEST(ExhaustiveN3, ZeroGammaFisherIsZero) {
  const auto p = kfmc::make_gas_params(3, 0.2, 0.0);
  kfmc::ReferenceChainConfig rc;
  rc.measure_steps = 100000;
  rc.block_size = 1000;
  const auto r = kfmc::exhaustive_mc_n3(p, rc);
  EXPECT_EQ(r.i_ref, 0.0);
  EXPECT_EQ(r.i_err, 0.0);
  // gamma = 0 is uniform: C = <1/d> over the cube.
  EXPECT_NEAR(r.c_ref, kCubeInverseR / p.box.length, 5 * r.c_err);
}

TEST(ExhaustiveN3, AgreesWithProductionChain) {
  const auto p = kfmc::make_gas_params(3, 0.2, 10.0);
  kfmc::ReferenceChainConfig rc;
  rc.measure_steps = 1500000;
  const auto ref = kfmc::exhaustive_mc_n3(p, rc);
  kfmc::ChainConfig cfg;
  cfg.seed = 5;
  cfg.n_sweeps_measure = 500000;
  cfg.block_size = 10000;
  const auto e = kfmc::estimate(p, cfg);
  EXPECT_LE(std::abs(e.i_hat - ref.i_ref), 3 * std::hypot(e.i_err, ref.i_err));
  EXPECT_LE(std::abs(e.c_hat - ref.c_ref), 3 * std::hypot(e.c_err, ref.c_err));
}

TEST(ExhaustiveN3, AgreesWithProductionChainUnderPairCouplingOverride) {
  const auto p = kfmc::make_gas_params(3, 0.2, 10.0, 40.0);
  kfmc::ReferenceChainConfig rc;
  rc.measure_steps = 1500000;
  const auto ref = kfmc::exhaustive_mc_n3(p, rc);
  kfmc::ChainConfig cfg;
  cfg.seed = 6;
  cfg.n_sweeps_measure = 500000;
  cfg.block_size = 10000;
  const auto e = kfmc::estimate(p, cfg);
  EXPECT_LE(std::abs(e.i_hat - ref.i_ref), 3 * std::hypot(e.i_err, ref.i_err));
  EXPECT_LE(std::abs(e.c_hat - ref.c_ref), 3 * std::hypot(e.c_err, ref.c_err));

  // A stiffer outer pair pushes electrons 2 and 3 apart, which changes C.
  const auto plain = kfmc::exhaustive_mc_n3(kfmc::make_gas_params(3, 0.2, 10.0), rc);
  EXPECT_GT(std::abs(plain.c_ref - ref.c_ref), 3 * std::hypot(plain.c_err, ref.c_err));
}

TEST(ExhaustiveN3, ErrorShrinksWithLength) {
  const auto p = kfmc::make_gas_params(3, 0.2, 10.0);
  double ratio_sum = 0.0;
  const int pairs = 6;
  for (int s = 0; s < pairs; ++s) {
    kfmc::ReferenceChainConfig a;
    a.seed = 100 + s;
    a.measure_steps = 200000;
    a.block_size = 5000;
    kfmc::ReferenceChainConfig b = a;
    b.seed = 200 + s;
    b.measure_steps = 400000;
    ratio_sum += kfmc::exhaustive_mc_n3(p, b).c_err / kfmc::exhaustive_mc_n3(p, a).c_err;
  }
  const double mean_ratio = ratio_sum / pairs;
  EXPECT_GT(mean_ratio, 0.55);
  EXPECT_LT(mean_ratio, 0.9);
}

TEST(ExhaustiveN3, RejectsOtherSizes) {
  EXPECT_THROW(kfmc::exhaustive_mc_n3(kfmc::make_gas_params(4, 0.2, 1.0)), kfmc::Unsupported);
}
