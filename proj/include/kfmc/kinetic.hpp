#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kfmc/error.hpp"
#include "kfmc/fitter.hpp"

namespace kfmc {

// Density on a rectangular lattice. Index (i, j, k) is stored at
// (i * ny + j) * nz + k, i.e. z varies fastest.
struct DensityField {
  std::array<std::size_t, 3> dims{3, 3, 3};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::vector<double> values;

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * dims[1] + j) * dims[2] + k; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }
  double volume() const {
    return static_cast<double>(dims[0] - 1) * spacing[0] * static_cast<double>(dims[1] - 1) * spacing[1] *
           static_cast<double>(dims[2] - 1) * spacing[2];
  }
};

inline void validate(const DensityField& f) {
  for (int a = 0; a < 3; ++a) {
    if (f.dims[a] < 3) throw InvalidParameter("density field needs at least 3 points per axis");
    if (!(f.spacing[a] > 0.0) || !std::isfinite(f.spacing[a]))
      throw InvalidParameter("density field spacing must be positive");
  }
  if (f.values.size() != f.dims[0] * f.dims[1] * f.dims[2])
    throw InvalidParameter("density field value count does not match dimensions");
  for (double v : f.values) {
    if (!std::isfinite(v)) throw InvalidParameter("density field contains non-finite values");
    if (v < 0.0) throw InvalidParameter("density field contains negative values");
  }
}

// Points below this density contribute nothing to either term.
inline constexpr double kDensityFloor = 1e-12;

struct KineticBreakdown {
  double total = 0.0;
  double weizsacker = 0.0;  // (1/8) int |grad rho|^2 / rho
  double local = 0.0;       // int rho (a + b ln rho)
  std::size_t floored_points = 0;
  std::size_t extrapolated_points = 0;  // above the floor but outside the fit's density range
};

namespace detail {

// d/dx along one axis: central inside, second-order one-sided at the ends.
inline double axis_derivative(const DensityField& f, std::size_t i, std::size_t j, std::size_t k, int axis) {
  std::array<std::size_t, 3> p{i, j, k};
  const std::size_t n = f.dims[axis];
  const double h = f.spacing[axis];
  auto at = [&](std::size_t q) {
    auto r = p;
    r[axis] = q;
    return f(r[0], r[1], r[2]);
  };
  const std::size_t q = p[axis];
  if (q == 0) return (4.0 * (at(1) - at(0)) - (at(2) - at(0))) / (2.0 * h);
  if (q == n - 1) return (4.0 * (at(n - 1) - at(n - 2)) - (at(n - 1) - at(n - 3))) / (2.0 * h);
  return (at(q + 1) - at(q - 1)) / (2.0 * h);
}

inline double trapezoid_weight(std::size_t q, std::size_t n, double h) { return (q == 0 || q == n - 1) ? 0.5 * h : h; }

}  // namespace detail

inline KineticBreakdown kinetic_functional(const DensityField& field, const FitResult& fit) {
  validate(field);
  if (!std::isfinite(fit.a) || !std::isfinite(fit.b)) throw InvalidParameter("fit constants must be finite");
  KineticBreakdown out;
  for (std::size_t i = 0; i < field.dims[0]; ++i) {
    const double wi = detail::trapezoid_weight(i, field.dims[0], field.spacing[0]);
    for (std::size_t j = 0; j < field.dims[1]; ++j) {
      const double wj = detail::trapezoid_weight(j, field.dims[1], field.spacing[1]);
      for (std::size_t k = 0; k < field.dims[2]; ++k) {
        const double w = wi * wj * detail::trapezoid_weight(k, field.dims[2], field.spacing[2]);
        const double rho = field(i, j, k);
        if (rho < kDensityFloor) {
          ++out.floored_points;
          continue;
        }
        double g2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double d = detail::axis_derivative(field, i, j, k, a);
          g2 += d * d;
        }
        out.weizsacker += w * g2 / rho;
        out.local += w * rho * (fit.a + fit.b * std::log(rho));
        if (fit.n_points > 0 && (rho < fit.rho_min || rho > fit.rho_max)) ++out.extrapolated_points;
      }
    }
  }
  out.weizsacker /= 8.0;
  out.total = out.weizsacker + out.local;
  return out;
}

// Text format:
//   # comment lines anywhere before the values
//   NX NY NZ
//   HX HY HZ
//   v v v ...   (NX*NY*NZ values, z fastest)
inline DensityField read_density_field(std::istream& in) {
  DensityField f;
  std::string line;
  std::size_t lineno = 0;
  int header = 0;
  f.values.clear();
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (header == 0) {
      if (!(ls >> f.dims[0] >> f.dims[1] >> f.dims[2])) throw ParseError("expected three grid dimensions", lineno);
      header = 1;
    } else if (header == 1) {
      if (!(ls >> f.spacing[0] >> f.spacing[1] >> f.spacing[2])) throw ParseError("expected three grid spacings", lineno);
      header = 2;
      f.values.reserve(f.dims[0] * f.dims[1] * f.dims[2]);
    } else {
      std::string tok;
      while (ls >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tok.size()) throw ParseError("bad density value '" + tok + "'", lineno);
        f.values.push_back(v);
      }
    }
  }
  if (header < 2) throw ParseError("density field header incomplete", lineno);
  try {
    validate(f);
  } catch (const InvalidParameter& e) {
    throw ParseError(e.what(), 0);
  }
  return f;
}

inline void write_density_field(std::ostream& out, const DensityField& f) {
  out << f.dims[0] << ' ' << f.dims[1] << ' ' << f.dims[2] << '\n';
  out.precision(17);
  out << f.spacing[0] << ' ' << f.spacing[1] << ' ' << f.spacing[2] << '\n';
  for (std::size_t i = 0; i < f.values.size(); ++i) out << f.values[i] << ((i + 1) % f.dims[2] == 0 ? '\n' : ' ');
}

}  // namespace kfmc
