#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

#include "errors.hpp"

namespace spde {

enum class MollifierShape { bump, cosine };

inline MollifierShape parse_shape(const std::string& s) {
  if (s == "bump") return MollifierShape::bump;
  if (s == "cosine") return MollifierShape::cosine;
  throw ConfigError("unknown mollifier shape '" + s + "'");
}

inline const char* shape_name(MollifierShape s) {
  return s == MollifierShape::bump ? "bump" : "cosine";
}

// unnormalized radial profile on [0,1)
inline double profile_raw(MollifierShape s, double r) {
  r = std::abs(r);
  if (r >= 1.0) return 0.0;
  if (s == MollifierShape::bump) return std::exp(-1.0 / (1.0 - r * r));
  return 0.5 * (1.0 + std::cos(M_PI * r));
}

// constants making the radial profile a unit-mass density in 2D and in 1D
inline double profile_norm_2d(MollifierShape s) {
  using boost::math::quadrature::gauss_kronrod;
  double m = gauss_kronrod<double, 61>::integrate(
      [s](double r) { return 2.0 * M_PI * r * profile_raw(s, r); }, 0.0, 1.0, 12, 1e-15);
  return 1.0 / m;
}

inline double profile_norm_1d(MollifierShape s) {
  using boost::math::quadrature::gauss_kronrod;
  double m = gauss_kronrod<double, 61>::integrate(
      [s](double r) { return 2.0 * profile_raw(s, r); }, 0.0, 1.0, 12, 1e-15);
  return 1.0 / m;
}

}  // namespace spde
