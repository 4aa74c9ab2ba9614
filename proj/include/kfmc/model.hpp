#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kfmc/error.hpp"
#include "kfmc/geometry.hpp"
#include "kfmc/vec3.hpp"

namespace kfmc {

// Pair distances below this (bohr) are treated as coincidences.
inline constexpr double kHardCore = 1e-9;

// Uniform spinless electron gas in a periodic cube plus the ansatz coupling.
struct GasParams {
  std::size_t n_electrons = 2;
  double density = 1.0;  // e / bohr^3
  double gamma = 0.0;
  // Coupling of pairs not involving electron 0 when a non-central electron
  // moves. Unset means the same value as gamma.
  std::optional<double> pair_coupling;
  Box box;

  double beta() const { return pair_coupling.value_or(gamma); }
  double density_sq() const { return density * density; }
};

inline GasParams make_gas_params(std::size_t n_electrons, double density, double gamma,
                                 std::optional<double> pair_coupling = std::nullopt) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw InvalidParameter("gamma must be finite and non-negative");
  if (pair_coupling && (!(*pair_coupling >= 0.0) || !std::isfinite(*pair_coupling)))
    throw InvalidParameter("pair coupling must be finite and non-negative");
  GasParams p;
  p.n_electrons = n_electrons;
  p.density = density;
  p.gamma = gamma;
  p.pair_coupling = pair_coupling;
  p.box = make_box(n_electrons, density);
  return p;
}

inline GasParams with_gamma(GasParams p, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw InvalidParameter("gamma must be finite and non-negative");
  p.gamma = gamma;
  return p;
}

// Electron positions; index 0 is the conditioning electron r1.
struct Configuration {
  std::vector<Vec3> positions;

  std::size_t size() const { return positions.size(); }
  const Vec3& operator[](std::size_t i) const { return positions[i]; }
  Vec3& operator[](std::size_t i) { return positions[i]; }
};

inline double pair_energy(const Vec3& ri, const Vec3& rj, const GasParams& params) {
  const double d = image_distance(ri, rj, params.box);
  if (d < kHardCore) throw Singularity("pair distance below hard-core guard");
  return params.density_sq() / d;
}

// Gradient of pair_energy(r1, rn) with respect to r1: -rho^2 (r1 - rn) / d^3.
inline Vec3 pair_energy_gradient(const Vec3& r1, const Vec3& rn, const GasParams& params) {
  const Vec3 sep = minimum_image(r1 - rn, params.box);
  const double d2 = norm2(sep);
  const double d = std::sqrt(d2);
  if (d < kHardCore) throw Singularity("pair distance below hard-core guard");
  return sep * (-params.density_sq() / (d2 * d));
}

// ln(f_new / f_old) for displacing electron `moved` to `new_position`.
// Returns -infinity when the trial position coincides with another electron.
inline double log_f_ratio(const Configuration& config, std::size_t moved, const Vec3& new_position,
                          const GasParams& params) {
  if (moved >= config.size()) throw InvalidParameter("log_f_ratio: electron index out of range");
  const Vec3& old_position = config[moved];
  if (new_position == old_position) return 0.0;
  const double rho2 = params.density_sq();
  double central = 0.0;
  double others = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (i == moved) continue;
    const double d_new = image_distance(config[i], new_position, params.box);
    if (d_new < kHardCore) return -std::numeric_limits<double>::infinity();
    const double d_old = image_distance(config[i], old_position, params.box);
    const double delta = rho2 / d_new - rho2 / d_old;
    if (i == 0 || moved == 0) central += delta;
    else others += delta;
  }
  double out = 0.0;
  if (params.gamma != 0.0) out -= params.gamma * central;
  if (params.beta() != 0.0) out -= params.beta() * others;
  return out;
}

// Sum over n >= 1 of the r1-gradient of the pair energy between electron 0 and n.
inline Vec3 central_gradient(const Configuration& config, const GasParams& params) {
  Vec3 g;
  for (std::size_t n = 1; n < config.size(); ++n) g += pair_energy_gradient(config[0], config[n], params);
  return g;
}

// Per-configuration Fisher summand (1/8)|grad_1 ln f|^2.
inline double fisher_summand(const Configuration& config, const GasParams& params) {
  const Vec3 g = central_gradient(config, params);
  if (params.gamma == 0.0) return 0.0;
  return params.gamma * params.gamma / 8.0 * norm2(g);
}

// (1/N) times the sum of inverse minimum-image distances over all pairs.
inline double coulomb_summand(const Configuration& config, const GasParams& params) {
  double sum = 0.0;
  const std::size_t n = config.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = image_distance(config[i], config[j], params.box);
      if (d < kHardCore) throw Singularity("pair distance below hard-core guard");
      sum += 1.0 / d;
    }
  }
  return sum / static_cast<double>(n);
}

}  // namespace kfmc
