#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace spde {

struct Mat2 {
  double a11 = 1, a12 = 0, a22 = 1;

  double det() const { return a11 * a22 - a12 * a12; }
  Mat2 inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, a11 / d};
  }
  double trace() const { return a11 + a22; }
  std::array<double, 2> eigenvalues() const {
    const double m = 0.5 * (a11 + a22);
    const double r = std::hypot(0.5 * (a11 - a22), a12);
    return {m - r, m + r};
  }
  double quad(double y1, double y2) const { return a11 * y1 * y1 + 2 * a12 * y1 * y2 + a22 * y2 * y2; }
  std::array<double, 2> apply(double y1, double y2) const {
    return {a11 * y1 + a12 * y2, a12 * y1 + a22 * y2};
  }
  double operator()(int i, int j) const {
    if (i == 0 && j == 0) return a11;
    if (i == 1 && j == 1) return a22;
    return a12;
  }
  static Mat2 scalar(double c) { return {c, 0, c}; }
  bool operator==(const Mat2&) const = default;
};

// A(eta) = lambda0*I + g(eta) R(theta) diag(1, 1+beta) R(theta)^T
//   g(eta)     = g_amp * (1 + tanh(g_slope*(eta - g_center)))
//   theta(eta) = theta_amp * tanh(theta_slope*eta)
struct MatrixMapSpec {
  std::string family = "tanh";
  double lambda0 = 1.0;
  double g_amp = 0.0;
  double g_slope = 1.0;
  double g_center = 0.0;
  double beta = 0.0;
  double theta_amp = 0.0;
  double theta_slope = 1.0;

  void validate() const {
    if (family != "tanh") throw ConfigError("unknown matrix family '" + family + "'");
    if (!(lambda0 > 0)) throw EllipticityViolation("lambda0 must be positive");
    if (g_amp < 0) throw EllipticityViolation("g_amp must be nonnegative");
    if (beta <= -1) throw EllipticityViolation("beta must exceed -1");
  }

  double g(double eta) const { return g_amp * (1.0 + std::tanh(g_slope * (eta - g_center))); }
  double theta(double eta) const { return theta_amp * std::tanh(theta_slope * eta); }

  Mat2 operator()(double eta) const {
    const double gv = g(eta), th = theta(eta);
    const double c = std::cos(th), s = std::sin(th);
    const double d1 = gv, d2 = gv * (1.0 + beta);
    return {lambda0 + d1 * c * c + d2 * s * s, (d1 - d2) * c * s, lambda0 + d1 * s * s + d2 * c * c};
  }

  bool constant() const { return g_amp == 0.0 || g_slope == 0.0; }
  // det A is constant in eta only if g is
  bool det_constant() const { return constant(); }

  // sup over a fine eta sweep of |d^k/d eta^k A|_max, k = 0,1,2 (central differences)
  std::array<double, 3> derivative_bounds(double range = 40.0, int samples = 8001) const {
    std::array<double, 3> b{0, 0, 0};
    const double e = 1e-4;
    auto norm = [](const Mat2& m) { return std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a22)}); };
    for (int s = 0; s < samples; ++s) {
      double x = -range / 2 + range * s / (samples - 1);
      Mat2 m0 = (*this)(x), mp = (*this)(x + e), mm = (*this)(x - e);
      Mat2 d1{(mp.a11 - mm.a11) / (2 * e), (mp.a12 - mm.a12) / (2 * e), (mp.a22 - mm.a22) / (2 * e)};
      Mat2 d2{(mp.a11 - 2 * m0.a11 + mm.a11) / (e * e), (mp.a12 - 2 * m0.a12 + mm.a12) / (e * e),
              (mp.a22 - 2 * m0.a22 + mm.a22) / (e * e)};
      b[0] = std::max(b[0], norm(m0));
      b[1] = std::max(b[1], norm(d1));
      b[2] = std::max(b[2], norm(d2));
    }
    return b;
  }
};

struct CoefficientField {
  Grid2D grid;
  int nt = 1;  // 1 for a spatial field, else space-time slices
  std::vector<double> eta;  // the h values it was built from
  std::vector<Mat2> a, inv;
  std::vector<double> det;
  double lambda = 0;

  std::size_t size() const { return a.size(); }
  std::size_t index(int i, int j, int k = 0) const {
    return static_cast<std::size_t>(k) * grid.size() + grid.index(i, j);
  }
  double max_eigenvalue() const {
    double m = 0;
    for (const auto& x : a) m = std::max(m, x.eigenvalues()[1]);
    return m;
  }
  double min_eigenvalue() const {
    double m = INFINITY;
    for (const auto& x : a) m = std::min(m, x.eigenvalues()[0]);
    return m;
  }
  bool constant() const {
    return std::all_of(a.begin(), a.end(), [&](const Mat2& m) { return m == a.front(); });
  }
};

namespace detail {
inline void fill_coeff(CoefficientField& cf, const std::vector<double>& h, const MatrixMapSpec& spec) {
  spec.validate();
  cf.lambda = spec.lambda0;
  cf.eta = h;
  cf.a.resize(h.size());
  cf.inv.resize(h.size());
  cf.det.resize(h.size());
  const double tol = 1e-12 * spec.lambda0;
  for (std::size_t q = 0; q < h.size(); ++q) {
    if (!std::isfinite(h[q])) throw EllipticityViolation("non-finite h value");
    Mat2 m = spec(h[q]);
    const double d = m.det();
    if (m.eigenvalues()[0] < spec.lambda0 - tol || d < spec.lambda0 * spec.lambda0 * (1 - 1e-12))
      throw EllipticityViolation("matrix map not lambda-elliptic at h=" + std::to_string(h[q]));
    cf.a[q] = m;
    cf.det[q] = d;
    cf.inv[q] = m.inverse();
  }
}
}  // namespace detail

inline CoefficientField build_coefficient_field(const Field2D& h, const MatrixMapSpec& spec) {
  CoefficientField cf;
  cf.grid = h.grid;
  detail::fill_coeff(cf, h.values, spec);
  return cf;
}

inline CoefficientField build_coefficient_field(const SpaceTimeField& h, const MatrixMapSpec& spec) {
  CoefficientField cf;
  cf.grid = h.stgrid.grid;
  cf.nt = h.stgrid.nt;
  detail::fill_coeff(cf, h.values, spec);
  return cf;
}

inline CoefficientField constant_coefficient_field(const Grid2D& g, const Mat2& m) {
  CoefficientField cf;
  cf.grid = g;
  cf.a.assign(g.size(), m);
  cf.inv.assign(g.size(), m.inverse());
  cf.det.assign(g.size(), m.det());
  cf.eta.assign(g.size(), 0.0);
  cf.lambda = m.eigenvalues()[0];
  if (!(cf.lambda > 0)) throw EllipticityViolation("matrix not positive definite");
  return cf;
}

struct DetInv {
  double det;
  Mat2 inv;
};

inline DetInv det_inverse_at(const CoefficientField& cf, int i, int j, int k = 0) {
  const std::size_t q = cf.index(i, j, k);
  return {cf.det[q], cf.inv[q]};
}

inline DetInv det_inverse(const Mat2& m) {
  const double d = m.det();
  if (!(d > 0) || !(m.a11 > 0)) throw EllipticityViolation("matrix not positive definite");
  return {d, m.inverse()};
}

}  // namespace spde
