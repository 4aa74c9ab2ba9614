#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "kfmc/error.hpp"
#include "kfmc/estimator.hpp"
#include "kfmc/parallel.hpp"
#include "kfmc/rng.hpp"

namespace kfmc {

enum class PointKind { grid, probe, star };

struct ScanPoint {
  double gamma = 0.0;
  Estimate estimate;
  PointKind kind = PointKind::grid;

  double gamma_hat() const { return estimate.gamma_hat; }
  double error() const { return estimate.gamma_hat_err; }
};

struct GammaScan {
  std::vector<ScanPoint> points;  // sorted by gamma
  double gamma_star = 0.0;
  double gamma_hat_min = 0.0;
  double gamma_hat_min_err = 0.0;
  double i_at_star = 0.0;
  double i_at_star_err = 0.0;
  bool interior = false;
  bool refined = false;
  bool noise_limited = false;
  std::size_t probes = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

// Estimate at one gamma. `stream` is a distinct index per chain for seeding.
using GammaObjective = std::function<Estimate(double gamma, std::uint64_t stream)>;

// Ratio of a typical pair exponent gamma*rho^2/r_s-like spacing; the minimum
// sits at comparable values of this coupling across densities.
inline double reduced_coupling_scale(double density) { return std::pow(density, 7.0 / 3.0); }

inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw InvalidParameter("log_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

// 12 log-spaced gammas from reduced coupling 0.01 to 2, mapped to `density`.
inline std::vector<double> default_gamma_grid(double density) {
  auto grid = log_grid(0.01, 2.0, 12);
  const double scale = reduced_coupling_scale(density);
  for (double& g : grid) g /= scale;
  return grid;
}

inline Estimate chain_objective(const GasParams& base, const ChainConfig& cfg, double gamma, std::uint64_t stream) {
  ChainConfig c = cfg;
  c.seed = derive_seed(cfg.seed, stream);
  return estimate(with_gamma(base, gamma), c);
}

namespace detail {

inline double combined(double a, double b) { return std::sqrt(a * a + b * b); }

inline void sort_points(std::vector<ScanPoint>& pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const ScanPoint& a, const ScanPoint& b) { return a.gamma < b.gamma; });
}

inline std::size_t argmin_grid(const std::vector<ScanPoint>& pts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].gamma_hat() < pts[best].gamma_hat()) best = i;
  return best;
}

inline void set_star(GammaScan& scan, const ScanPoint& p) {
  scan.gamma_star = p.gamma;
  scan.gamma_hat_min = p.gamma_hat();
  scan.gamma_hat_min_err = p.error();
  scan.i_at_star = p.estimate.i_hat;
  scan.i_at_star_err = p.estimate.i_err;
}

}  // namespace detail

// True when the minimum lies strictly inside the grid and undercuts both
// endpoints by more than `sigmas` combined standard errors.
inline bool is_interior_minimum(const std::vector<ScanPoint>& grid, double sigmas = 2.0) {
  if (grid.size() < 3) return false;
  const std::size_t m = detail::argmin_grid(grid);
  if (m == 0 || m + 1 == grid.size()) return false;
  const auto& lo = grid.front();
  const auto& hi = grid.back();
  const auto& mid = grid[m];
  return lo.gamma_hat() - mid.gamma_hat() > sigmas * detail::combined(lo.error(), mid.error()) &&
         hi.gamma_hat() - mid.gamma_hat() > sigmas * detail::combined(hi.error(), mid.error());
}

inline GammaScan scan_gamma(const std::vector<double>& grid, const GammaObjective& objective, std::size_t threads = 1) {
  if (grid.size() < 3) throw InvalidParameter("scan_gamma: grid needs at least 3 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw InvalidParameter("scan_gamma: gamma must be >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidParameter("scan_gamma: grid must be strictly increasing");
  }
  std::function<ScanPoint(std::size_t)> job = [&](std::size_t i) {
    try {
      return ScanPoint{grid[i], objective(grid[i], i), PointKind::grid};
    } catch (const std::exception& e) {
      throw Error("scan aborted at gamma=" + std::to_string(grid[i]) + ": " + e.what());
    }
  };
  GammaScan scan;
  scan.points = parallel_map<ScanPoint>(grid.size(), threads, job);
  const std::size_t m = detail::argmin_grid(scan.points);
  detail::set_star(scan, scan.points[m]);
  scan.interior = is_interior_minimum(scan.points);
  scan.bracket_lo = scan.points[m == 0 ? 0 : m - 1].gamma;
  scan.bracket_hi = scan.points[std::min(m + 1, scan.points.size() - 1)].gamma;
  return scan;
}

inline GammaScan scan_gamma(const GasParams& base, const std::vector<double>& grid, const ChainConfig& cfg,
                            std::size_t threads = 1) {
  return scan_gamma(grid, [&](double g, std::uint64_t s) { return chain_objective(base, cfg, g, s); }, threads);
}

struct RefineOptions {
  // Target bracket width in ln(gamma) (relative width when the bracket is positive).
  double tolerance = 0.1;
  std::size_t probe_budget = 12;
  // Evaluate a final chain at the bracket midpoint for I(gamma*).
  bool evaluate_star = true;
};

// Golden-section search between the grid neighbours of the minimiser, in
// ln(gamma) when the bracket is strictly positive. Each probe is a fresh chain.
inline GammaScan refine_gamma(GammaScan scan, const GammaObjective& objective, const RefineOptions& opt = {}) {
  if (!scan.interior) throw InvalidParameter("refine_gamma: scan has no interior minimum");
  std::vector<ScanPoint> grid;
  for (const auto& p : scan.points)
    if (p.kind == PointKind::grid) grid.push_back(p);
  const std::size_t m = detail::argmin_grid(grid);
  double a = grid[m - 1].gamma, b = grid[m + 1].gamma;
  const bool logspace = a > 0.0;
  auto to_x = [&](double g) { return logspace ? std::log(g) : g; };
  auto to_g = [&](double x) { return logspace ? std::exp(x) : x; };
  double xa = to_x(a), xb = to_x(b);
  scan.refined = true;
  scan.noise_limited = false;
  scan.probes = 0;

  if (xb - xa > opt.tolerance) {
    constexpr double kInvPhi = 0.6180339887498949;
    std::uint64_t stream = 1000;
    auto probe = [&](double x) {
      const double g = to_g(x);
      ScanPoint p{g, objective(g, stream++), PointKind::probe};
      scan.points.push_back(p);
      ++scan.probes;
      return p;
    };
    double x1 = xb - kInvPhi * (xb - xa);
    double x2 = xa + kInvPhi * (xb - xa);
    ScanPoint p1, p2;
    bool have1 = false, have2 = false;
    while (xb - xa > opt.tolerance) {
      if (!have1) {
        if (scan.probes >= opt.probe_budget) break;
        p1 = probe(x1);
        have1 = true;
      }
      if (!have2) {
        if (scan.probes >= opt.probe_budget) break;
        p2 = probe(x2);
        have2 = true;
      }
      if (std::abs(p1.gamma_hat() - p2.gamma_hat()) < detail::combined(p1.error(), p2.error())) {
        scan.noise_limited = true;
        break;
      }
      if (p1.gamma_hat() < p2.gamma_hat()) {
        xb = x2;
        x2 = x1;
        p2 = p1;
        x1 = xb - kInvPhi * (xb - xa);
        have1 = false;
      } else {
        xa = x1;
        x1 = x2;
        p1 = p2;
        x2 = xa + kInvPhi * (xb - xa);
        have2 = false;
      }
    }
  }
  scan.bracket_lo = to_g(xa);
  scan.bracket_hi = to_g(xb);
  const double star = to_g(0.5 * (xa + xb));
  if (opt.evaluate_star) {
    ScanPoint p{star, objective(star, 999), PointKind::star};
    scan.points.push_back(p);
    detail::set_star(scan, p);
  } else {
    scan.gamma_star = star;
  }
  detail::sort_points(scan.points);
  return scan;
}

inline GammaScan refine_gamma(GammaScan scan, const GasParams& base, const ChainConfig& cfg,
                              const RefineOptions& opt = {}) {
  return refine_gamma(std::move(scan), [&](double g, std::uint64_t s) { return chain_objective(base, cfg, g, s); },
                      opt);
}

}  // namespace kfmc
