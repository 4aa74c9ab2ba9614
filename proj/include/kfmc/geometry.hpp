#pragma once

#include <cmath>
#include <cstddef>

#include "kfmc/error.hpp"
#include "kfmc/vec3.hpp"

namespace kfmc {

// Cubic periodic cell of edge `length` (bohr).
struct Box {
  double length = 1.0;

  double half() const { return 0.5 * length; }
  double volume() const { return length * length * length; }
};

// Edge of the cube holding `n_electrons` at mean density `density`.
inline double box_length(std::size_t n_electrons, double density) {
  if (n_electrons < 2) throw InvalidParameter("box_length: need at least 2 electrons");
  if (!(density > 0.0) || !std::isfinite(density))
    throw InvalidParameter("box_length: density must be positive and finite");
  return std::cbrt(static_cast<double>(n_electrons) / density);
}

inline Box make_box(std::size_t n_electrons, double density) {
  return Box{box_length(n_electrons, density)};
}

namespace detail {

// Maps a scalar into [-L/2, L/2); exact ties at +L/2 go to -L/2.
inline double image_component(double d, double length) {
  const double half = 0.5 * length;
  double r = d - length * std::floor(d / length + 0.5);
  if (r >= half) r -= length;
  else if (r < -half) r += length;
  return r;
}

inline double wrap_component(double p, double length) {
  double r = p - length * std::floor(p / length);
  if (r >= length || r < 0.0) r = 0.0;
  return r;
}

}  // namespace detail

inline Vec3 minimum_image(const Vec3& displacement, const Box& box) {
  return {detail::image_component(displacement.x, box.length),
          detail::image_component(displacement.y, box.length),
          detail::image_component(displacement.z, box.length)};
}

inline Vec3 wrap(const Vec3& position, const Box& box) {
  return {detail::wrap_component(position.x, box.length),
          detail::wrap_component(position.y, box.length),
          detail::wrap_component(position.z, box.length)};
}

inline double image_distance(const Vec3& a, const Vec3& b, const Box& box) {
  return norm(minimum_image(a - b, box));
}

}  // namespace kfmc
