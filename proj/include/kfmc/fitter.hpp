#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kfmc/error.hpp"

namespace kfmc {

struct DensityRow {
  double density = 0.0;
  std::size_t n_electrons = 0;
  double gamma_star = 0.0;
  double i_at_star = 0.0;
  double i_err = 0.0;
};

// Rows may repeat a density for different electron counts.
struct DensityScan {
  std::vector<DensityRow> rows;
};

inline void validate(const DensityScan& scan) {
  std::set<std::pair<double, std::size_t>> seen;
  for (const auto& r : scan.rows) {
    if (!(r.density > 0.0) || !std::isfinite(r.density)) throw InvalidParameter("density scan: rho must be positive");
    if (!seen.emplace(r.density, r.n_electrons).second)
      throw InvalidParameter("density scan: duplicate (rho, N) row");
  }
}

enum class Weighting { weighted, unweighted };

// I(rho) = a + b ln(rho).
struct FitResult {
  double a = 0.0;
  double b = 0.0;
  double a_err = 0.0;
  double b_err = 0.0;
  double chi2_per_dof = 0.0;
  Weighting weighting = Weighting::weighted;
  std::size_t n_points = 0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  std::vector<std::string> warnings;

  double operator()(double rho) const { return a + b * std::log(rho); }
};

// Densities outside this window are extrapolation for the fitted form.
inline constexpr double kFitDomainLo = 0.04;
inline constexpr double kFitDomainHi = 1.0;

// Linear least squares of I against ln(rho). Weighted fits use 1/sigma^2 and
// report absolute-sigma errors; a zero error bar anywhere forces an
// unweighted fit whose errors are scaled by the residual variance.
inline FitResult fit_log(const DensityScan& scan, Weighting weighting = Weighting::weighted) {
  validate(scan);
  const std::size_t n = scan.rows.size();
  if (n < 3) throw FitError("fit_log: need at least 3 points");
  bool weighted = weighting == Weighting::weighted;
  for (const auto& r : scan.rows)
    if (!(r.i_err > 0.0)) weighted = false;

  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : scan.rows) {
    const double w = weighted ? 1.0 / (r.i_err * r.i_err) : 1.0;
    const double x = std::log(r.density);
    s += w; sx += w * x; sy += w * r.i_at_star; sxx += w * x * x; sxy += w * x * r.i_at_star;
  }
  const double det = s * sxx - sx * sx;
  if (!(std::abs(det) > 1e-12 * s * sxx)) throw FitError("fit_log: degenerate design (all densities equal)");

  FitResult fit;
  fit.weighting = weighted ? Weighting::weighted : Weighting::unweighted;
  fit.n_points = n;
  fit.a = (sxx * sy - sx * sxy) / det;
  fit.b = (s * sxy - sx * sy) / det;

  double chi2 = 0.0;
  fit.rho_min = fit.rho_max = scan.rows.front().density;
  for (const auto& r : scan.rows) {
    const double w = weighted ? 1.0 / (r.i_err * r.i_err) : 1.0;
    const double res = r.i_at_star - fit(r.density);
    chi2 += w * res * res;
    fit.rho_min = std::min(fit.rho_min, r.density);
    fit.rho_max = std::max(fit.rho_max, r.density);
  }
  const double dof = static_cast<double>(n - 2);
  fit.chi2_per_dof = chi2 / dof;
  const double scale = weighted ? 1.0 : fit.chi2_per_dof;
  fit.a_err = std::sqrt(scale * sxx / det);
  fit.b_err = std::sqrt(scale * s / det);
  if (fit.rho_min < kFitDomainLo * (1 - 1e-12) || fit.rho_max > kFitDomainHi * (1 + 1e-12))
    fit.warnings.push_back("fit data extend outside the density window [0.04, 1.0]");
  return fit;
}

}  // namespace kfmc
