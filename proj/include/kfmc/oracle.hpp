#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "kfmc/error.hpp"
#include "kfmc/model.hpp"

namespace kfmc {

// Deterministic two-electron reference. The minimum-image integrand depends
// only on |r2 - r1| inside the cube centred on r1, so the position of r1
// does not enter.
struct QuadratureSpec {
  std::size_t points_per_axis = 48;     // midpoint grid per cube face
  double exclusion_fraction = 1e-3;     // excluded ball radius / L
  std::size_t radial_panels = 400;      // log-spaced Gauss-Legendre panels on [eps, L/2]
};

struct QuadratureResult {
  double i_exact = 0.0;
  double c_exact = 0.0;
  double i_error = 0.0;  // Richardson estimate from k vs 2k face points
  double c_error = 0.0;
  double exclusion_bias_c = 0.0;  // C mass inside the excluded ball, weight taken as 1
};

namespace detail {

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
inline constexpr std::array<double, 8> kGlNodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> kGlWeights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// Radial integrands times r^2: weight, weight * fisher, weight * coulomb.
struct RadialMoments {
  double z = 0.0, fisher = 0.0, coulomb = 0.0;
  RadialMoments& operator+=(const RadialMoments& o) {
    z += o.z; fisher += o.fisher; coulomb += o.coulomb;
    return *this;
  }
};

inline RadialMoments radial_point(double r, const GasParams& p) {
  const double rho2 = p.density_sq();
  const double w = p.gamma == 0.0 ? 1.0 : std::exp(-p.gamma * rho2 / r);
  const double grad = rho2 / (r * r);
  const double fisher = p.gamma == 0.0 ? 0.0 : p.gamma * p.gamma / 8.0 * grad * grad;
  const double r2 = r * r;
  return {w * r2, w * fisher * r2, w * 0.5 / r * r2};
}

inline RadialMoments gauss_legendre(double a, double b, const GasParams& p) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  RadialMoments out;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    for (double s : {-1.0, 1.0}) {
      RadialMoments m = radial_point(mid + s * half * kGlNodes[i], p);
      const double w = kGlWeights[i] * half;
      out += RadialMoments{m.z * w, m.fisher * w, m.coulomb * w};
    }
  }
  return out;
}

inline RadialMoments face_integral(const GasParams& p, const RadialMoments& inner, double h, std::size_t k) {
  RadialMoments total;
  const double cell = 2.0 * h / static_cast<double>(k);
  // Fixed summation order; symmetric quadrant is not exploited.
  for (std::size_t iu = 0; iu < k; ++iu) {
    const double u = -h + (static_cast<double>(iu) + 0.5) * cell;
    for (std::size_t iv = 0; iv < k; ++iv) {
      const double v = -h + (static_cast<double>(iv) + 0.5) * cell;
      const double r2 = h * h + u * u + v * v;
      const double r = std::sqrt(r2);
      RadialMoments g = inner;
      g += gauss_legendre(h, r, p);
      const double omega = h / (r2 * r) * cell * cell;
      total += RadialMoments{g.z * omega, g.fisher * omega, g.coulomb * omega};
    }
  }
  return RadialMoments{6.0 * total.z, 6.0 * total.fisher, 6.0 * total.coulomb};
}

}  // namespace detail

// I and C for N = 2 as f-weighted averages over r2 in the periodic box.
inline QuadratureResult quadrature_n2(const GasParams& params, const QuadratureSpec& spec = {}) {
  if (params.n_electrons != 2) throw Unsupported("quadrature_n2 requires exactly 2 electrons");
  if (spec.points_per_axis < 8) throw InvalidParameter("points_per_axis must be >= 8");
  const double h = params.box.half();
  const double eps = spec.exclusion_fraction * params.box.length;

  detail::RadialMoments inner;
  const double log_ratio = std::log(h / eps);
  for (std::size_t i = 0; i < spec.radial_panels; ++i) {
    const double a = eps * std::exp(log_ratio * static_cast<double>(i) / static_cast<double>(spec.radial_panels));
    const double b = eps * std::exp(log_ratio * static_cast<double>(i + 1) / static_cast<double>(spec.radial_panels));
    inner += detail::gauss_legendre(a, b, params);
  }

  const auto coarse = detail::face_integral(params, inner, h, spec.points_per_axis);
  const auto fine = detail::face_integral(params, inner, h, 2 * spec.points_per_axis);

  QuadratureResult out;
  out.i_exact = fine.fisher / fine.z;
  out.c_exact = fine.coulomb / fine.z;
  // Midpoint rule is second order: error of the fine result ~ difference / 3.
  out.i_error = std::abs(fine.fisher / fine.z - coarse.fisher / coarse.z) / 3.0;
  out.c_error = std::abs(fine.coulomb / fine.z - coarse.coulomb / coarse.z) / 3.0;
  // 0.5 * integral of 1/r over the ball, relative to the box volume.
  out.exclusion_bias_c = 0.5 * 2.0 * M_PI * eps * eps / params.box.volume();
  return out;
}

struct ReferenceResult {
  double i_ref = 0.0;
  double i_err = 0.0;
  double c_ref = 0.0;
  double c_err = 0.0;
  std::uint64_t m_samples = 0;
};

struct ReferenceChainConfig {
  std::uint64_t seed = 7;
  std::size_t burnin_steps = 20000;
  std::size_t measure_steps = 2000000;
  std::size_t block_size = 10000;
  double max_displacement_fraction = 0.15;  // of L
};

// Plain Metropolis for N = 3 written without the production chain: full
// recomputation of every pair each step, 32-bit Mersenne twister and the
// standard library distributions.
inline ReferenceResult exhaustive_mc_n3(const GasParams& params, const ReferenceChainConfig& cfg = {}) {
  if (params.n_electrons != 3) throw Unsupported("exhaustive_mc_n3 requires exactly 3 electrons");
  if (cfg.block_size < 1 || cfg.measure_steps < 2 * cfg.block_size)
    throw InsufficientData("reference chain needs at least 2 blocks");
  using P = std::array<double, 3>;
  const double L = params.box.length;
  const double rho2 = params.density_sq();
  const double g = params.gamma;
  const double beta = params.beta();

  std::mt19937 gen(static_cast<std::uint32_t>(cfg.seed ^ (cfg.seed >> 32)) ^ 0x2545f491u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  const double step = cfg.max_displacement_fraction * L;

  auto sep = [L](const P& a, const P& b) {
    P s{};
    for (int c = 0; c < 3; ++c) {
      double d = a[c] - b[c];
      d -= L * std::nearbyint(d / L);
      s[c] = d;
    }
    return s;
  };
  auto dist = [&](const P& a, const P& b) {
    const P s = sep(a, b);
    return std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
  };
  auto exponent = [&](const std::array<P, 3>& x) {
    double e = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const double d = dist(x[i], x[j]);
        if (d < kHardCore) return std::numeric_limits<double>::infinity();
        e += (i == 0 ? g : beta) * rho2 / d;
      }
    return e;
  };
  auto observables = [&](const std::array<P, 3>& x, double& fisher, double& coulomb) {
    double gx = 0, gy = 0, gz = 0;
    for (int n = 1; n < 3; ++n) {
      const P s = sep(x[0], x[n]);
      const double d = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
      const double f = -rho2 / (d * d * d);
      gx += f * s[0]; gy += f * s[1]; gz += f * s[2];
    }
    fisher = g * g / 8.0 * (gx * gx + gy * gy + gz * gz);
    coulomb = (1.0 / dist(x[0], x[1]) + 1.0 / dist(x[0], x[2]) + 1.0 / dist(x[1], x[2])) / 3.0;
  };

  std::array<P, 3> x{};
  do {
    for (auto& p : x)
      for (auto& c : p) c = L * unit(gen);
  } while (!std::isfinite(exponent(x)));
  double current = exponent(x);

  std::vector<double> bf, bc;
  double sf = 0, sc = 0, pf = 0, pc = 0;
  std::size_t pcount = 0;
  const std::size_t total = cfg.burnin_steps + cfg.measure_steps;
  for (std::size_t t = 0; t < total; ++t) {
    const int k = pick(gen);
    std::array<P, 3> y = x;
    for (auto& c : y[k]) {
      c += step * (2.0 * unit(gen) - 1.0);
      c -= L * std::floor(c / L);
    }
    const double proposed = exponent(y);
    if (std::isfinite(proposed) && unit(gen) < std::exp(current - proposed)) {
      x = y;
      current = proposed;
    }
    if (t < cfg.burnin_steps) continue;
    double f, c;
    observables(x, f, c);
    sf += f; sc += c; pf += f; pc += c;
    if (++pcount == cfg.block_size) {
      bf.push_back(pf / static_cast<double>(cfg.block_size));
      bc.push_back(pc / static_cast<double>(cfg.block_size));
      pf = pc = 0.0;
      pcount = 0;
    }
  }
  auto sem = [](const std::vector<double>& v) {
    double m = 0;
    for (double e : v) m += e;
    m /= static_cast<double>(v.size());
    double ss = 0;
    for (double e : v) ss += (e - m) * (e - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  ReferenceResult out;
  out.m_samples = cfg.measure_steps;
  out.i_ref = sf / static_cast<double>(cfg.measure_steps);
  out.c_ref = sc / static_cast<double>(cfg.measure_steps);
  out.i_err = sem(bf);
  out.c_err = sem(bc);
  return out;
}

}  // namespace kfmc
