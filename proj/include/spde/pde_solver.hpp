#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "coeff_field.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "wick_hermite.hpp"

namespace spde {

struct SolverConfig {
  double dt = 1e-3;
  double T = 1.0;
  double lambda_split = 0;  // 0: use the max eigenvalue of a
  bool dealias = false;     // 2/3 rule on nonlinear terms
  double blowup_growth = 1e6;
  int snapshot_every = 0;  // 0: only initial and final

  int steps() const { return static_cast<int>(std::llround(T / dt)); }
  void validate() const {
    if (!(dt > 0)) throw NonpositiveTime("dt must be positive");
    if (!(T > 0)) throw NonpositiveTime("T must be positive");
    if (steps() < 1) throw NonpositiveTime("T/dt must give at least one step");
  }
};

enum class CountertermMode { function, constant, none };

inline const char* mode_name(CountertermMode m) {
  switch (m) {
    case CountertermMode::function: return "function";
    case CountertermMode::constant: return "constant";
    default: return "none";
  }
}

inline CountertermMode parse_mode(const std::string& s) {
  if (s == "function") return CountertermMode::function;
  if (s == "constant") return CountertermMode::constant;
  if (s == "none") return CountertermMode::none;
  throw ConfigError("unknown counterterm mode '" + s + "'");
}

struct SolutionTrajectory {
  std::vector<double> times;
  std::vector<Field2D> fields;
  double delta = 0;
  std::uint64_t seed = 0;
  std::string equation;
  CountertermMode mode = CountertermMode::function;
  bool blowup = false;
  double blowup_time = 0;

  const Field2D& final() const { return fields.back(); }
  void push(double t, const Field2D& f) {
    if (!times.empty() && !(t > times.back())) throw NonpositiveTime("trajectory times must increase");
    times.push_back(t);
    fields.push_back(f);
  }
};

// Spectral stepper for u_t = a:D^2 u + f on the periodic grid.
//   semi-implicit: (1 - dt lam Lap) u' = u + dt((a - lam I):D^2 u + f)
//   exponential (a constant): exact propagator, forcing frozen over the step
class HeatStepper {
 public:
  HeatStepper(const Grid2D& g, double dt, double lambda_split)
      : g_(g), dt_(dt), lam_(lambda_split), fft_(fft_for(g.n)), sym_(symbols_for(g)) {
    if (!(dt > 0)) throw NonpositiveTime("dt must be positive");
    const std::size_t m = fft_.spectrum_size();
    uh_.resize(m);
    tmp_.resize(m);
    denom_.resize(m);
    for (std::size_t q = 0; q < m; ++q) denom_[q] = 1.0 / (1.0 - dt_ * lam_ * sym_.lap[q]);
    d11_.resize(g.size());
    d12_.resize(g.size());
    d22_.resize(g.size());
    rhs_.resize(g.size());
  }

  // constant-coefficient exact propagator
  void use_exponential(const Mat2& a) {
    const std::size_t m = fft_.spectrum_size();
    expo_ = true;
    E_.resize(m);
    Phi_.resize(m);
    for (std::size_t q = 0; q < m; ++q) {
      double k1 = sym_.k1[q], k2 = sym_.k2[q];
      double s = a.a11 * k1 * k1 + 2 * a.a12 * sym_.d1[q] * sym_.d2[q] + a.a22 * k2 * k2;
      E_[q] = std::exp(-dt_ * s);
      Phi_[q] = s > 0 ? -std::expm1(-dt_ * s) / s : dt_;
    }
  }

  double dt() const { return dt_; }
  double lambda() const { return lam_; }
  const Grid2D& grid() const { return g_; }

  // one step; a has g.size() entries (ignored in exponential mode)
  void step(std::span<double> u, std::span<const double> f, std::span<const Mat2> a) {
    const std::size_t N = g_.size(), m = fft_.spectrum_size();
    if (expo_) {
      fft_.forward(u, uh_);
      fft_.forward(f, tmp_);
      for (std::size_t q = 0; q < m; ++q) uh_[q] = E_[q] * uh_[q] + Phi_[q] * tmp_[q];
      fft_.inverse(uh_, u);
      return;
    }
    fft_.forward(u, uh_);
    for (std::size_t q = 0; q < m; ++q) tmp_[q] = -sym_.k1[q] * sym_.k1[q] * uh_[q];
    fft_.inverse(tmp_, d11_);
    for (std::size_t q = 0; q < m; ++q) tmp_[q] = -sym_.d1[q] * sym_.d2[q] * uh_[q];
    fft_.inverse(tmp_, d12_);
    for (std::size_t q = 0; q < m; ++q) tmp_[q] = -sym_.k2[q] * sym_.k2[q] * uh_[q];
    fft_.inverse(tmp_, d22_);
    for (std::size_t p = 0; p < N; ++p) {
      const Mat2& A = a[p];
      rhs_[p] = u[p] + dt_ * ((A.a11 - lam_) * d11_[p] + 2 * A.a12 * d12_[p] + (A.a22 - lam_) * d22_[p] + f[p]);
    }
    fft_.forward(rhs_, uh_);
    for (std::size_t q = 0; q < m; ++q) uh_[q] *= denom_[q];
    fft_.inverse(uh_, u);
  }

  // spectral first derivatives
  void gradient(std::span<const double> u, std::span<double> ux, std::span<double> uy) {
    const std::size_t m = fft_.spectrum_size();
    fft_.forward(u, uh_);
    for (std::size_t q = 0; q < m; ++q) tmp_[q] = cplx(0, sym_.d1[q]) * uh_[q];
    fft_.inverse(tmp_, ux);
    for (std::size_t q = 0; q < m; ++q) tmp_[q] = cplx(0, sym_.d2[q]) * uh_[q];
    fft_.inverse(tmp_, uy);
  }

  void dealias(std::span<double> f) {
    const std::size_t m = fft_.spectrum_size();
    fft_.forward(f, uh_);
    for (std::size_t q = 0; q < m; ++q)
      if (!sym_.keep23[q]) uh_[q] = 0;
    fft_.inverse(uh_, f);
  }

 private:
  Grid2D g_;
  double dt_, lam_;
  const Fft2D& fft_;
  const SpectralSymbols& sym_;
  std::vector<cplx> uh_, tmp_;
  std::vector<double> denom_, d11_, d12_, d22_, rhs_;
  bool expo_ = false;
  std::vector<double> E_, Phi_;
};

namespace detail {

inline double split_lambda(const CoefficientField& a, const SolverConfig& cfg) {
  double lmax = a.max_eigenvalue();
  if (cfg.lambda_split == 0) return lmax;
  if (cfg.lambda_split < lmax * (1 - 1e-12))
    throw EllipticityViolation("lambda_split below the max eigenvalue of a");
  return cfg.lambda_split;
}

inline std::span<const Mat2> coeff_slice(const CoefficientField& a, int k) {
  const std::size_t N = a.grid.size();
  int s = a.nt == 1 ? 0 : std::min(k, a.nt - 1);
  return {a.a.data() + s * N, N};
}

inline double sup(std::span<const double> v) {
  double m = 0;
  for (double x : v) {
    if (!std::isfinite(x)) return INFINITY;
    m = std::max(m, std::abs(x));
  }
  return m;
}

// growth sentinel; true when the step blew up
inline bool blew_up(double before, double after, double factor) {
  return !std::isfinite(after) || after > factor * std::max(before, 1.0);
}

}  // namespace detail

// one step of the semi-implicit scheme
inline Field2D heat_step(const CoefficientField& a, const Field2D& u, const Field2D& f, const SolverConfig& cfg) {
  require_same(a.grid, u.grid, "heat_step");
  require_same(a.grid, f.grid, "heat_step");
  cfg.validate();
  HeatStepper st(a.grid, cfg.dt, detail::split_lambda(a, cfg));
  Field2D out = u;
  double before = u.sup_norm();
  st.step(out.values, f.values, detail::coeff_slice(a, 0));
  if (detail::blew_up(before, detail::sup(out.values), cfg.blowup_growth))
    throw InstabilityDetected("sup norm grew by more than the blow-up factor in one step");
  return out;
}

namespace detail {

// generic driver: forcing(step, u, f_out) fills f for the step starting at step*dt
inline SolutionTrajectory run(const CoefficientField& a, const Field2D& u0, const SolverConfig& cfg,
                              const std::function<void(int, std::span<const double>, std::span<double>)>& forcing,
                              HeatStepper& st, const std::string& tag) {
  SolutionTrajectory tr;
  tr.equation = tag;
  Field2D u = u0, f(u0.grid);
  tr.push(0.0, u);
  const int n = cfg.steps();
  for (int k = 0; k < n; ++k) {
    forcing(k, u.values, f.values);
    double before = sup(u.values);
    st.step(u.values, f.values, coeff_slice(a, k));
    double after = sup(u.values);
    double t = (k + 1) * cfg.dt;
    if (blew_up(before, after, cfg.blowup_growth)) {
      tr.blowup = true;
      tr.blowup_time = t;
      return tr;
    }
    bool snap = (cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0) || k + 1 == n;
    if (snap) tr.push(t, u);
  }
  return tr;
}

}  // namespace detail

// u_t = a:D^2 u + xi, u(0) = 0, xi constant in time
inline SolutionTrajectory solve_linear_she(const CoefficientField& a, const Field2D& xi, const SolverConfig& cfg) {
  require_same(a.grid, xi.grid, "solve_linear_she");
  cfg.validate();
  HeatStepper st(a.grid, cfg.dt, detail::split_lambda(a, cfg));
  return detail::run(
      a, Field2D(a.grid), cfg,
      [&](int, std::span<const double>, std::span<double> f) { std::copy(xi.values.begin(), xi.values.end(), f.begin()); },
      st, "she");
}

// u(T) only, no trajectory bookkeeping; used by the Monte Carlo loops
inline Field2D solve_linear_she_final(const CoefficientField& a, const Field2D& xi, const SolverConfig& cfg,
                                      HeatStepper& st) {
  Field2D u(a.grid);
  const int n = cfg.steps();
  for (int k = 0; k < n; ++k) st.step(u.values, xi.values, detail::coeff_slice(a, k));
  if (!u.all_finite()) throw InstabilityDetected("non-finite solution");
  return u;
}

// smooth scalar nonlinearities: zero, constant amp, or amp*(offset + tanh(slope*u))
struct SmoothFn {
  enum Kind { zero, constant, tanh } kind = zero;
  double amp = 0, slope = 1, offset = 0;

  static SmoothFn make_constant(double c) { return {constant, c, 1, 0}; }
  static SmoothFn make_tanh(double amp, double slope = 1, double offset = 0) { return {tanh, amp, slope, offset}; }

  double value(double u) const {
    switch (kind) {
      case constant: return amp;
      case tanh: return amp * (offset + std::tanh(slope * u));
      default: return 0;
    }
  }
  double deriv(double u) const {
    if (kind != tanh) return 0;
    double t = std::tanh(slope * u);
    return amp * slope * (1 - t * t);
  }
};

struct PamNonlinearity {
  SmoothFn g;
  SmoothFn f;
  Mat2 fmat{1, 0, 1};  // f_ij(u) = f(u) * fmat_ij
};

struct PamCounterterms {
  std::vector<double> xi2;                // c^{Xi^2}(x)
  std::vector<double> b11, b12, b22;      // c^{b^2}_ij(x)
  bool empty() const { return xi2.empty(); }
};

// u_t = a:D^2 u + sum f_ij(u)(d_i u d_j u - c_ij g(u)^2) + g(u)(xi - c g'(u))
inline SolutionTrajectory solve_pam_renormalized(const CoefficientField& a, const Field2D& xi,
                                                 const PamCounterterms& ct, const PamNonlinearity& nl,
                                                 const Field2D& u0, const SolverConfig& cfg) {
  require_same(a.grid, xi.grid, "solve_pam_renormalized");
  require_same(a.grid, u0.grid, "solve_pam_renormalized");
  cfg.validate();
  const std::size_t N = a.grid.size();
  if (!ct.empty() && (ct.xi2.size() != N || ct.b11.size() != N || ct.b12.size() != N || ct.b22.size() != N))
    throw GridMismatch("counterterm fields do not match the grid");
  HeatStepper st(a.grid, cfg.dt, detail::split_lambda(a, cfg));
  std::vector<double> ux(N), uy(N);
  const bool need_grad = nl.f.kind != SmoothFn::zero;
  auto forcing = [&](int, std::span<const double> u, std::span<double> F) {
    if (need_grad) st.gradient(u, ux, uy);
    for (std::size_t p = 0; p < N; ++p) {
      double g = nl.g.value(u[p]), fv = nl.f.value(u[p]);
      double c = ct.empty() ? 0 : ct.xi2[p];
      double v = -g * c * nl.g.deriv(u[p]);
      if (need_grad) {
        double g2 = g * g;
        double q11 = ux[p] * ux[p] - (ct.empty() ? 0 : ct.b11[p]) * g2;
        double q12 = ux[p] * uy[p] - (ct.empty() ? 0 : ct.b12[p]) * g2;
        double q22 = uy[p] * uy[p] - (ct.empty() ? 0 : ct.b22[p]) * g2;
        v += fv * (nl.fmat.a11 * q11 + 2 * nl.fmat.a12 * q12 + nl.fmat.a22 * q22);
      }
      F[p] = v;
    }
    if (cfg.dealias) st.dealias(F);
    for (std::size_t p = 0; p < N; ++p) F[p] += nl.g.value(u[p]) * xi.values[p];
  };
  return detail::run(a, u0, cfg, forcing, st, "pam");
}

// <1>: zero initial data, driven by xi slice by slice. Exponential integrator if a is constant.
inline SpaceTimeField stochastic_convolution(const CoefficientField& a, const SpaceTimeField& xi,
                                             double lambda_split = 0) {
  require_same(a.grid, xi.stgrid.grid, "stochastic_convolution");
  const SpaceTimeGrid& stg = xi.stgrid;
  SolverConfig cfg;
  cfg.dt = stg.dt();
  cfg.lambda_split = lambda_split;
  HeatStepper st(a.grid, cfg.dt, detail::split_lambda(a, cfg));
  if (a.constant()) st.use_exponential(a.a.front());
  SpaceTimeField out(stg);
  std::vector<double> u(a.grid.size(), 0.0);
  for (int k = 0; k + 1 < stg.nt; ++k) {
    st.step(u, xi.slice(k), detail::coeff_slice(a, k));
    if (!std::isfinite(detail::sup(u))) throw InstabilityDetected("stochastic convolution diverged");
    std::copy(u.begin(), u.end(), out.slice(k + 1).begin());
  }
  return out;
}

// Callbacks for u_t = a:D^2 u - H_K(u, c) + xi; noise(step, out) gives the forcing slice,
// counterterm(step, out) the c values (left untouched for mode none).
struct PhiInputs {
  std::function<std::span<const Mat2>(int)> coeff;
  std::function<void(int, std::span<double>)> noise;
  std::function<void(int, std::span<double>)> counterterm;
  bool constant_coeff = false;
  Mat2 a_const{1, 0, 1};
  double lambda_split = 1;
};

inline SolutionTrajectory solve_phi_core(const Grid2D& g, const PhiInputs& in, int K, const Field2D& u0,
                                         const SolverConfig& cfg, CountertermMode mode) {
  if (K < 1) throw ConfigError("K must be >= 1");
  cfg.validate();
  HeatStepper st(g, cfg.dt, in.lambda_split);
  if (in.constant_coeff) st.use_exponential(in.a_const);
  const std::size_t N = g.size();
  std::vector<double> xi(N), c(N, 0.0), F(N);
  std::vector<Mat2> dummy;
  SolutionTrajectory tr;
  tr.equation = "phi";
  tr.mode = mode;
  Field2D u = u0;
  tr.push(0.0, u);
  const int n = cfg.steps();
  const bool dealias = cfg.dealias && K > 1;
  for (int k = 0; k < n; ++k) {
    in.noise(k, xi);
    if (mode != CountertermMode::none) in.counterterm(k, c);
    for (std::size_t p = 0; p < N; ++p) F[p] = -hermite<double>(K, u.values[p], c[p]);
    if (dealias) st.dealias(F);
    for (std::size_t p = 0; p < N; ++p) F[p] += xi[p];
    double before = detail::sup(u.values);
    st.step(u.values, F, in.constant_coeff ? std::span<const Mat2>() : in.coeff(k));
    double after = detail::sup(u.values);
    double t = (k + 1) * cfg.dt;
    if (detail::blew_up(before, after, cfg.blowup_growth)) {
      tr.blowup = true;
      tr.blowup_time = t;
      return tr;
    }
    if ((cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0) || k + 1 == n) tr.push(t, u);
  }
  return tr;
}

// time-independent a and counterterm field c(x); noise slices from a SpaceTimeField
inline SolutionTrajectory solve_phi_renormalized(const CoefficientField& a, const SpaceTimeField& xi,
                                                 std::span<const double> c2, int K, const Field2D& u0, double T,
                                                 CountertermMode mode = CountertermMode::function) {
  require_same(a.grid, xi.stgrid.grid, "solve_phi_renormalized");
  SolverConfig cfg;
  cfg.dt = xi.stgrid.dt();
  cfg.T = T;
  cfg.dealias = K > 1;
  if (cfg.steps() > xi.stgrid.nt) throw NonpositiveTime("noise shorter than T");
  PhiInputs in;
  in.lambda_split = detail::split_lambda(a, cfg);
  in.constant_coeff = a.constant();
  in.a_const = a.a.front();
  in.coeff = [&](int k) { return detail::coeff_slice(a, k); };
  in.noise = [&](int k, std::span<double> out) {
    auto s = xi.slice(k);
    std::copy(s.begin(), s.end(), out.begin());
  };
  std::vector<double> cc(c2.begin(), c2.end());
  if (mode == CountertermMode::constant) {
    double m = 0;
    for (double v : cc) m += v;
    m /= cc.size();
    std::fill(cc.begin(), cc.end(), m);
  }
  in.counterterm = [&](int, std::span<double> out) {
    if (cc.size() != out.size()) throw GridMismatch("counterterm field size");
    std::copy(cc.begin(), cc.end(), out.begin());
  };
  return solve_phi_core(a.grid, in, K, u0, cfg, mode);
}

// ---- checkpoints: "SPDECKPT" magic, u32 version, i32 n, f64 extent, f64 t, n*n f64, little endian

inline void write_checkpoint(const std::string& path, const Field2D& f, double t) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw ConfigError("cannot write " + path);
  const char magic[8] = {'S', 'P', 'D', 'E', 'C', 'K', 'P', 'T'};
  std::uint32_t ver = 1;
  std::int32_t n = f.grid.n;
  o.write(magic, 8);
  o.write(reinterpret_cast<const char*>(&ver), 4);
  o.write(reinterpret_cast<const char*>(&n), 4);
  o.write(reinterpret_cast<const char*>(&f.grid.extent), 8);
  o.write(reinterpret_cast<const char*>(&t), 8);
  o.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 8));
}

inline std::pair<Field2D, double> read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  char magic[8];
  std::uint32_t ver;
  std::int32_t n;
  double extent, t;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&ver), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&extent), 8);
  in.read(reinterpret_cast<char*>(&t), 8);
  if (!in || std::memcmp(magic, "SPDECKPT", 8) != 0 || ver != 1) throw ParseError("bad checkpoint header in " + path);
  Grid2D g(n);
  g.extent = extent;
  Field2D f(g);
  in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 8));
  if (!in) throw ParseError("truncated checkpoint " + path);
  return {f, t};
}

}  // namespace spde
