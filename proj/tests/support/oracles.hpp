#pragma once
// Test-only reference computations, written independently of the library code paths.

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

using GL = boost::math::quadrature::gauss<double, 20>;

inline double composite(const std::function<double(double)>& f, double a, double b, int panels) {
  double s = 0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels, hi = a + (b - a) * (p + 1) / panels;
    s += GL::integrate(f, lo, hi);
  }
  return s;
}

inline double raw(bool bump, double r) {
  r = std::abs(r);
  if (r >= 1) return 0;
  return bump ? std::exp(-1 / (1 - r * r)) : 0.5 * (1 + std::cos(M_PI * r));
}

// unit-mass radial profile in the plane, Fourier transform by Hankel integral
struct Radial {
  bool bump;
  double mass;
  explicit Radial(bool b) : bump(b) {
    mass = composite([&](double r) { return 2 * M_PI * r * raw(bump, r); }, 0, 1, 16);
  }
  double hat(double k) const {
    return composite([&](double r) { return 2 * M_PI * r * raw(bump, r) * std::cyl_bessel_j(0.0, k * r); }, 0, 1, 24) /
           mass;
  }
};

// k-integral on a log scale: int_0^kmax f(k) dk
inline double log_k_integral(const std::function<double(double)>& f, double kmin, double kmax, int panels) {
  return composite([&](double x) { const double k = std::exp(x); return k * f(k); }, std::log(kmin), std::log(kmax),
                   panels);
}

// constant coefficient a = c I, heat kernel truncated at time 1
// c^{Xi^2} = (2pi)^-1 int k rhohat(delta k)^2 (1 - e^{-ck^2})/(ck^2) dk
inline double xi2(double c, double delta, bool bump = true) {
  Radial R(bump);
  auto f = [&](double kap) {
    const double h = R.hat(kap), s = c * kap * kap / (delta * delta);
    return kap * h * h * (s < 1e-12 ? 1.0 : -std::expm1(-s) / s);
  };
  return log_k_integral(f, 1e-6 * delta, 40.0, 240) / (2 * M_PI * delta * delta);
}

// c^{b^2}_11 = (2pi)^-2 int k1^2 rhohat^2 ((1 - e^{-s})/s)^2 dk
inline double b2_11(double c, double delta, bool bump = true) {
  Radial R(bump);
  auto f = [&](double kap) {
    const double h = R.hat(kap), k = kap / delta, s = c * k * k;
    const double g = s < 1e-12 ? 1.0 : -std::expm1(-s) / s;
    return 0.5 * k * k * kap * h * h * g * g;
  };
  return log_k_integral(f, 1e-6 * delta, 40.0, 240) / (2 * M_PI * delta * delta);
}

// space-time product mollifier, time profile at scale delta^2, kernel truncated at time 1
// c^{<2>} = (1/2) (2pi)^-2 int rhohat(delta k)^2 int R(tau) (e^{-|tau|s} - e^{-(2-|tau|)s})/s dtau dk
inline double phi2(double c, double delta, bool bump = true) {
  Radial R(bump);
  const double m1 = composite([&](double t) { return raw(bump, t); }, -1, 1, 8);
  // time autocorrelation on [0,2] in units of delta^2
  const int nv = 400;
  std::vector<double> v(nv), Rv(nv), wv(nv);
  {
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    int idx = 0;
    const int panels = nv / 20;
    for (int p = 0; p < panels; ++p) {
      const double lo = 2.0 * p / panels, hi = 2.0 * (p + 1) / panels, cc = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
      for (std::size_t q = 0; q < x.size(); ++q)
        for (int sg : {-1, 1}) {
          if (x[q] == 0 && sg > 0) continue;
          if (idx >= nv) break;
          v[idx] = cc + sg * hw * x[q];
          wv[idx] = hw * w[q];
          ++idx;
        }
    }
    for (int i = 0; i < nv; ++i) {
      const double t = v[i];
      Rv[i] = composite([&](double s) { return raw(bump, s) * raw(bump, s - t); }, t - 1, 1, 6) / (m1 * m1);
    }
  }
  auto T = [&](double s) {
    double acc = 0;
    for (int i = 0; i < nv; ++i) {
      const double tau = v[i] * delta * delta;
      const double e = s < 1e-12 ? (2 - 2 * tau) : (std::exp(-tau * s) - std::exp(-(2 - tau) * s)) / s;
      acc += 2 * wv[i] * Rv[i] * e;
    }
    return acc;
  };
  auto f = [&](double kap) {
    const double h = R.hat(kap), k = kap / delta;
    return kap * h * h * T(c * k * k);
  };
  return 0.5 * log_k_integral(f, 1e-6 * delta, 40.0, 240) / (2 * M_PI * delta * delta);
}

inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

}  // namespace oracle
