#pragma once

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "coeff_field.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "mollifier_profile.hpp"

namespace spde {

struct FrozenKernelParams {
  double detA = 1;
  Mat2 invA;

  static FrozenKernelParams from_matrix(const Mat2& a) {
    auto di = det_inverse(a);
    return {di.det, di.inv};
  }
  void validate() const {
    if (!(detA > 0)) throw EllipticityViolation("detA must be positive");
    if (!(invA.a11 > 0 && invA.det() > 0)) throw EllipticityViolation("invA not positive definite");
    if (std::abs(invA.det() * detA - 1.0) > 1e-10) throw EllipticityViolation("det(invA)*detA != 1");
  }
};

inline double E1(double x) { return boost::math::expint(1, x); }

// ---- kernels -------------------------------------------------------------

inline double frozen_heat_kernel(const FrozenKernelParams& p, double t, double y1, double y2) {
  if (!(t > 0)) throw NonpositiveTime("frozen heat kernel needs t > 0");
  const double q = p.invA.quad(y1, y2);
  return std::exp(-q / (4 * t)) / (4 * M_PI * t * std::sqrt(p.detA));
}

// int_0^1 Z(t,y) dt = E1(q/4) / (4 pi sqrt det)
inline double greens_time_integral(const FrozenKernelParams& p, double y1, double y2) {
  const double q = p.invA.quad(y1, y2);
  if (!(q > 0)) throw OriginSingularity("G diverges at y = 0");
  return E1(q / 4) / (4 * M_PI * std::sqrt(p.detA));
}

// sum_j inv_ij y_j int_0^1 Z/(2t) dt = (inv y)_i e^{-q/4} / (2 pi q sqrt det)
inline double greens_gradient(const FrozenKernelParams& p, int i, double y1, double y2) {
  const double q = p.invA.quad(y1, y2);
  if (!(q > 0)) throw OriginSingularity("G_i diverges at y = 0");
  auto v = p.invA.apply(y1, y2);
  return v[i] * std::exp(-q / 4) / (2 * M_PI * q * std::sqrt(p.detA));
}

// ---- mollifier autocorrelation profiles -------------------------------------

// P = rho*rho for the 2D radial profile, tabulated on [0,2], unit mass.
class RadialAutocorrelation {
 public:
  explicit RadialAutocorrelation(MollifierShape shape, int nodes = 513) : shape_(shape) {
    const double c = profile_norm_2d(shape);
    const double h = 2.0 / (nodes - 1);
    std::vector<double> vals(nodes);
    using GL = boost::math::quadrature::gauss<double, 30>;
    const int ns = 8, nphi = 160;
    for (int k = 0; k < nodes; ++k) {
      const double r = k * h;
      double acc = 0;
      // composite GL in s on [0,1], trapezoid in phi (periodic)
      for (int p = 0; p < ns; ++p) {
        const double a = double(p) / ns, b = double(p + 1) / ns;
        acc += GL::integrate(
            [&](double s) {
              double inner = 0;
              for (int m = 0; m < nphi; ++m) {
                const double ph = 2 * M_PI * m / nphi;
                inner += profile_raw(shape, std::sqrt(std::max(0.0, r * r + s * s - 2 * r * s * std::cos(ph))));
              }
              return s * profile_raw(shape, s) * inner * (2 * M_PI / nphi);
            },
            a, b);
      }
      vals[k] = c * c * acc;
    }
    vals.back() = 0.0;
    spline_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        vals.begin(), vals.end(), 0.0, h, 0.0, 0.0);
    // renormalize to exact unit mass
    double mass = 0;
    for (int p = 0; p < 32; ++p) {
      const double a = 2.0 * p / 32, b = 2.0 * (p + 1) / 32;
      mass += GL::integrate([&](double r) { return 2 * M_PI * r * (*spline_)(r); }, a, b);
    }
    scale_ = 1.0 / mass;
  }

  double operator()(double r) const {
    r = std::abs(r);
    if (r >= 2.0) return 0.0;
    return scale_ * (*spline_)(r);
  }
  MollifierShape shape() const { return shape_; }

 private:
  MollifierShape shape_;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
  double scale_ = 1.0;
};

// R = rho1*rho1 for the 1D time profile on [-2,2], unit mass
class TimeAutocorrelation {
 public:
  explicit TimeAutocorrelation(MollifierShape shape, int nodes = 1025) : shape_(shape) {
    const double c = profile_norm_1d(shape);
    const double h = 2.0 / (nodes - 1);
    std::vector<double> vals(nodes);
    using GL = boost::math::quadrature::gauss<double, 30>;
    for (int k = 0; k < nodes; ++k) {
      const double tau = k * h;
      // overlap of [-1,1] and [tau-1, tau+1]
      const double lo = tau - 1, hi = 1.0;
      double acc = 0;
      const int np = 8;
      for (int p = 0; p < np; ++p) {
        const double a = lo + (hi - lo) * p / np, b = lo + (hi - lo) * (p + 1) / np;
        acc += GL::integrate([&](double s) { return profile_raw(shape, s) * profile_raw(shape, tau - s); }, a, b);
      }
      vals[k] = c * c * acc;
    }
    vals.back() = 0.0;
    spline_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        vals.begin(), vals.end(), 0.0, h, 0.0, 0.0);
    double mass = 0;
    for (int p = 0; p < 32; ++p) {
      const double a = 2.0 * p / 32, b = 2.0 * (p + 1) / 32;
      mass += 2 * GL::integrate([&](double t) { return (*spline_)(t); }, a, b);
    }
    scale_ = 1.0 / mass;
  }

  double operator()(double tau) const {
    tau = std::abs(tau);
    if (tau >= 2.0) return 0.0;
    return scale_ * (*spline_)(tau);
  }

 private:
  MollifierShape shape_;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
  double scale_ = 1.0;
};

inline const RadialAutocorrelation& radial_autocorrelation(MollifierShape s) {
  static std::mutex m;
  static std::map<MollifierShape, std::unique_ptr<RadialAutocorrelation>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& p = cache[s];
  if (!p) p = std::make_unique<RadialAutocorrelation>(s);
  return *p;
}

inline const TimeAutocorrelation& time_autocorrelation(MollifierShape s) {
  static std::mutex m;
  static std::map<MollifierShape, std::unique_ptr<TimeAutocorrelation>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& p = cache[s];
  if (!p) p = std::make_unique<TimeAutocorrelation>(s);
  return *p;
}

// ---- counterterm integrals for a single frozen matrix ------------------------

enum class CountertermKind { pam_xi2, pam_b2, phi2 };

inline const char* kind_name(CountertermKind k) {
  switch (k) {
    case CountertermKind::pam_xi2: return "pam_xi2";
    case CountertermKind::pam_b2: return "pam_b2";
    default: return "phi2";
  }
}

struct QuadratureOptions {
  int radial_panels = 4;   // composite GL panels in u, r = 2 delta u^2
  int angular_nodes = 64;  // trapezoid nodes on [0, pi)
  int time_panels = 4;     // GL panels for the phi2 tau integral
};

namespace detail {

using GL16 = boost::math::quadrature::gauss<double, 16>;

// int f(w) P_delta(|w|) dw for even f, polar with r = 2 delta u^2
template <class F>
double polar_against_profile(const RadialAutocorrelation& P, double delta, const QuadratureOptions& o, F&& f) {
  const auto& x = GL16::abscissa();
  const auto& wt = GL16::weights();
  std::vector<std::pair<double, double>> nodes;  // (u, weight) on [0,1]
  for (int p = 0; p < o.radial_panels; ++p) {
    const double a = double(p) / o.radial_panels, b = double(p + 1) / o.radial_panels;
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] == 0) {
        nodes.push_back({c, hw * wt[k]});
      } else {
        nodes.push_back({c - hw * x[k], hw * wt[k]});
        nodes.push_back({c + hw * x[k], hw * wt[k]});
      }
    }
  }
  const int M = o.angular_nodes;
  std::vector<double> cs(M), sn(M);
  for (int m = 0; m < M; ++m) {
    cs[m] = std::cos(M_PI * m / M);
    sn[m] = std::sin(M_PI * m / M);
  }
  double acc = 0;
  for (auto [u, w] : nodes) {
    const double r = 2 * delta * u * u;
    const double jac = 4 * delta * u * r;  // dr * r
    const double prof = P(r / delta) / (delta * delta);
    if (prof == 0.0) continue;
    double ang = 0;
    for (int m = 0; m < M; ++m) ang += f(r * cs[m], r * sn[m]);
    acc += w * jac * prof * ang * (2 * M_PI / M);
  }
  return acc;
}

}  // namespace detail

// c^{Xi^2} = int G(y) (rho*rho)^delta(y) dy
inline double counterterm_xi2_value(const Mat2& a, double delta, MollifierShape shape = MollifierShape::bump,
                                    const QuadratureOptions& o = {}) {
  if (!(delta > 0)) throw UnresolvableScale("delta must be positive");
  auto p = FrozenKernelParams::from_matrix(a);
  const double pre = 1.0 / (4 * M_PI * std::sqrt(p.detA));
  return detail::polar_against_profile(radial_autocorrelation(shape), delta, o, [&](double y1, double y2) {
    return pre * E1(p.invA.quad(y1, y2) / 4);
  });
}

// autocorrelation C_ij(w) = int G_i(y) G_j(y - w) dy
//   = -int_0^2 min(tau, 2 - tau) d_ij Z(tau, w) dtau
inline double gradient_autocorrelation(const FrozenKernelParams& p, int i, int j, double w1, double w2) {
  const double q = p.invA.quad(w1, w2);
  const double sd = std::sqrt(p.detA);
  auto v = p.invA.apply(w1, w2);
  const double inv = p.invA(i, j), vv = v[i] * v[j];
  double head = inv * E1(q / 4) / (8 * M_PI * sd) - vv * std::exp(-q / 4) / (4 * M_PI * q * sd);
  using GL = boost::math::quadrature::gauss<double, 10>;
  double tail = GL::integrate(
      [&](double t) {
        const double z = std::exp(-q / (4 * t)) / (4 * M_PI * t * sd);
        return (2 - t) * z * (inv / (2 * t) - vv / (4 * t * t));
      },
      1.0, 2.0);
  return head + tail;
}

// c^{b^2}_ij = int int G_i(y) G_j(y') (rho*rho)^delta(y - y') dy dy'
inline double counterterm_b2_value(const Mat2& a, int i, int j, double delta,
                                   MollifierShape shape = MollifierShape::bump, const QuadratureOptions& o = {}) {
  if (!(delta > 0)) throw UnresolvableScale("delta must be positive");
  auto p = FrozenKernelParams::from_matrix(a);
  return detail::polar_against_profile(radial_autocorrelation(shape), delta, o, [&](double w1, double w2) {
    return gradient_autocorrelation(p, i, j, w1, w2);
  });
}

// c^{<2>} for the product mollifier rho1(s) rho2(x):
//   int dw P_delta(w) 1/2 int R_delta(tau) int_{|tau|}^{2-|tau|} Z(sigma, w) dsigma dtau
inline double counterterm_phi2_value(const Mat2& a, double delta, MollifierShape shape = MollifierShape::bump,
                                     const QuadratureOptions& o = {}) {
  if (!(delta > 0)) throw UnresolvableScale("delta must be positive");
  if (2 * delta * delta >= 1.0) throw UnresolvableScale("time support exceeds the unit cutoff");
  auto p = FrozenKernelParams::from_matrix(a);
  const double pre = 1.0 / (4 * M_PI * std::sqrt(p.detA));
  const auto& R = time_autocorrelation(shape);
  const double d2 = delta * delta;
  // tau = 2 d2 u^2 on u in [0,1]; even in tau so integrate one side twice, times 1/2
  const auto& x = detail::GL16::abscissa();
  const auto& wt = detail::GL16::weights();
  std::vector<std::pair<double, double>> tn;  // (tau, weight incl. R and jacobian)
  for (int pn = 0; pn < o.time_panels; ++pn) {
    const double lo = double(pn) / o.time_panels, hi = double(pn + 1) / o.time_panels;
    const double c = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < x.size(); ++k) {
      for (int sgn : {-1, 1}) {
        if (x[k] == 0 && sgn > 0) continue;
        const double u = c + sgn * hw * x[k];
        const double tau = 2 * d2 * u * u;
        const double w = hw * wt[k] * 4 * d2 * u * R(tau / d2) / d2;
        tn.push_back({tau, w});
      }
    }
  }
  return detail::polar_against_profile(radial_autocorrelation(shape), delta, o, [&](double w1, double w2) {
    const double q = p.invA.quad(w1, w2);
    double acc = 0;
    for (auto [tau, w] : tn) acc += w * (E1(q / (4 * (2 - tau))) - E1(q / (4 * tau)));
    return pre * acc;
  });
}

inline double counterterm_value(CountertermKind kind, const Mat2& a, double delta, MollifierShape shape,
                                int i = 0, int j = 0, const QuadratureOptions& o = {}) {
  switch (kind) {
    case CountertermKind::pam_xi2: return counterterm_xi2_value(a, delta, shape, o);
    case CountertermKind::pam_b2: return counterterm_b2_value(a, i, j, delta, shape, o);
    default: return counterterm_phi2_value(a, delta, shape, o);
  }
}

// ---- fields ----------------------------------------------------------------

struct CountertermField {
  Grid2D grid;
  int nt = 1;
  std::vector<double> values;
  CountertermKind kind = CountertermKind::pam_xi2;
  int i = 0, j = 0;
  double delta = 0;

  double mean() const {
    double s = 0;
    for (double v : values) s += v;
    return s / values.size();
  }
};

// Counterterm as a function of the scalar eta (a = A(eta)), cubic spline on a
// fixed eta window; values outside the window are evaluated exactly.
class CountertermTable {
 public:
  CountertermTable(const MatrixMapSpec& spec, CountertermKind kind, double delta, MollifierShape shape, int i = 0,
                   int j = 0, double eta_min = -12.0, double eta_max = 12.0, int nodes = 193,
                   const QuadratureOptions& o = {})
      : spec_(spec), kind_(kind), delta_(delta), shape_(shape), i_(i), j_(j), lo_(eta_min), hi_(eta_max), opt_(o) {
    if (spec.constant()) {
      constant_ = true;
      cval_ = counterterm_value(kind, spec(0.0), delta, shape, i, j, o);
      return;
    }
    const double h = (hi_ - lo_) / (nodes - 1);
    std::vector<double> v(nodes);
    for (int k = 0; k < nodes; ++k) v[k] = counterterm_value(kind, spec(lo_ + k * h), delta, shape, i, j, o);
    spline_ = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(v.begin(), v.end(), lo_, h);
  }

  double operator()(double eta) const {
    if (constant_) return cval_;
    if (eta < lo_ || eta > hi_) return counterterm_value(kind_, spec_(eta), delta_, shape_, i_, j_, opt_);
    return (*spline_)(eta);
  }
  double delta() const { return delta_; }
  CountertermKind kind() const { return kind_; }

 private:
  MatrixMapSpec spec_;
  CountertermKind kind_;
  double delta_;
  MollifierShape shape_;
  int i_, j_;
  double lo_, hi_;
  QuadratureOptions opt_;
  bool constant_ = false;
  double cval_ = 0;
  std::shared_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

namespace detail {

inline CountertermField exact_field(const CoefficientField& a, CountertermKind kind, double delta,
                                    MollifierShape shape, int i, int j) {
  CountertermField c;
  c.grid = a.grid;
  c.nt = a.nt;
  c.kind = kind;
  c.i = i;
  c.j = j;
  c.delta = delta;
  c.values.resize(a.size());
  // value depends on the frozen matrix only; memoize on it
  std::map<std::tuple<double, double, double>, double> memo;
  for (std::size_t q = 0; q < a.size(); ++q) {
    const Mat2& m = a.a[q];
    auto key = std::make_tuple(m.a11, m.a12, m.a22);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, counterterm_value(kind, m, delta, shape, i, j)).first;
    c.values[q] = it->second;
  }
  return c;
}

}  // namespace detail

inline CountertermField counterterm_pam_xi2(const CoefficientField& a, double delta,
                                            MollifierShape shape = MollifierShape::bump) {
  return detail::exact_field(a, CountertermKind::pam_xi2, delta, shape, 0, 0);
}

inline CountertermField counterterm_pam_b2(const CoefficientField& a, int i, int j, double delta,
                                           MollifierShape shape = MollifierShape::bump) {
  return detail::exact_field(a, CountertermKind::pam_b2, delta, shape, i, j);
}

inline CountertermField counterterm_phi2(const CoefficientField& a, double delta,
                                         MollifierShape shape = MollifierShape::bump) {
  return detail::exact_field(a, CountertermKind::phi2, delta, shape, 0, 0);
}

// fast path through the eta table
inline CountertermField counterterm_from_table(const CoefficientField& a, const CountertermTable& t, int i = 0,
                                               int j = 0) {
  CountertermField c;
  c.grid = a.grid;
  c.nt = a.nt;
  c.kind = t.kind();
  c.i = i;
  c.j = j;
  c.delta = t.delta();
  c.values.resize(a.size());
  for (std::size_t q = 0; q < a.size(); ++q) c.values[q] = t(a.eta[q]);
  return c;
}

}  // namespace spde
