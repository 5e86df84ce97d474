#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "coeff_field.hpp"
#include "frozen_kernels.hpp"
#include "noise.hpp"
#include "pde_solver.hpp"
#include "wick_hermite.hpp"

namespace spde {

// sup |u_delta - u_{delta/2}| at the probe time for consecutive entries of a halving delta list
struct ConvergenceStudy {
  std::string equation;
  CountertermMode mode = CountertermMode::function;
  std::vector<double> deltas;
  std::vector<double> diffs;            // size deltas-1
  std::vector<double> remainder_diffs;  // phi only: same for u - <1>
  std::vector<double> sup_norms;
  std::vector<std::vector<double>> finals;  // u at the probe time, one per delta
  bool blowup = false;

  bool strictly_decreasing() const {
    if (blowup || diffs.size() < 2) return false;
    for (std::size_t i = 1; i < diffs.size(); ++i)
      if (!(diffs[i] < diffs[i - 1])) return false;
    return true;
  }
};

namespace detail {
inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t p = 0; p < a.size(); ++p) m = std::max(m, std::abs(a[p] - b[p]));
  return m;
}
inline void check_halving(const std::vector<double>& d) {
  if (d.size() < 2) throw ConfigError("need at least two delta levels");
  for (std::size_t i = 1; i < d.size(); ++i)
    if (std::abs(d[i - 1] / d[i] - 2) > 1e-12) throw ConfigError("delta list must halve");
}
inline Field2D cosine_mu(const Grid2D& g, double mu0, double mu_amp) {
  Field2D m(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) m(i, j) = mu0 + mu_amp * std::cos(2 * M_PI * g.coord(i));
  return m;
}
}  // namespace detail

struct PamConvergenceSetup {
  int n = 128;
  std::vector<double> deltas{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  MatrixMapSpec spec;
  double sigma_amp = 0, sigma_scale = 0.25;
  double mu0 = 0, mu_amp = 0;
  MollifierShape shape = MollifierShape::bump;
  std::uint64_t seed = 1;
  double dt = 1.0 / 1024, T = 0.25;
  PamNonlinearity nl;
  CountertermMode mode = CountertermMode::function;
};

inline ConvergenceStudy pam_self_convergence(const PamConvergenceSetup& s) {
  detail::check_halving(s.deltas);
  Grid2D g(s.n);
  Field2D xi = sample_white_noise_spatial(g, s.seed);
  Field2D mu = detail::cosine_mu(g, s.mu0, s.mu_amp);
  Field2D h = s.sigma_amp != 0 ? correlated_drift(xi, make_mollifier(s.sigma_scale, g, s.shape), s.sigma_amp, mu) : mu;
  CoefficientField a = build_coefficient_field(h, s.spec);
  SolverConfig cfg;
  cfg.dt = s.dt;
  cfg.T = s.T;
  ConvergenceStudy out;
  out.equation = "pam";
  out.mode = s.mode;
  out.deltas = s.deltas;
  std::vector<std::vector<double>> finals;
  for (double d : s.deltas) {
    Field2D xd = periodic_convolve(xi, make_mollifier(d, g, s.shape));
    PamCounterterms ct;
    if (s.mode != CountertermMode::none) {
      auto tab = [&](CountertermKind kind, int i, int j) {
        return counterterm_from_table(a, CountertermTable(s.spec, kind, d, s.shape, i, j), i, j).values;
      };
      ct.xi2 = tab(CountertermKind::pam_xi2, 0, 0);
      ct.b11 = tab(CountertermKind::pam_b2, 0, 0);
      ct.b12 = tab(CountertermKind::pam_b2, 0, 1);
      ct.b22 = tab(CountertermKind::pam_b2, 1, 1);
      if (s.mode == CountertermMode::constant)
        for (auto* v : {&ct.xi2, &ct.b11, &ct.b12, &ct.b22}) {
          double m = 0;
          for (double x : *v) m += x;
          std::fill(v->begin(), v->end(), m / v->size());
        }
    }
    auto tr = solve_pam_renormalized(a, xd, ct, s.nl, Field2D(g), cfg);
    if (tr.blowup) out.blowup = true;
    finals.push_back(tr.final().values);
    out.sup_norms.push_back(tr.final().sup_norm());
  }
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) out.diffs.push_back(detail::sup_diff(finals[i], finals[i + 1]));
  out.finals = std::move(finals);
  return out;
}

struct PhiConvergenceSetup {
  int n = 128;
  std::vector<double> deltas{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  MatrixMapSpec spec;
  double mu0 = 0, mu_amp = 0;
  MollifierShape shape = MollifierShape::bump;
  std::uint64_t seed = 1;
  int K = 3;
  double T = 0.25;
  CountertermMode mode = CountertermMode::function;
};

// dt = delta^2/2 per level; all levels driven by one noise (coarse slices are block averages)
inline ConvergenceStudy phi_self_convergence(const PhiConvergenceSetup& s) {
  detail::check_halving(s.deltas);
  if (s.K < 1) throw ConfigError("K must be >= 1");
  Grid2D g(s.n);
  CoefficientField a = build_coefficient_field(detail::cosine_mu(g, s.mu0, s.mu_amp), s.spec);
  const std::size_t N = g.size();
  const double lam = a.max_eigenvalue();
  ConvergenceStudy out;
  out.equation = "phi";
  out.mode = s.mode;
  out.deltas = s.deltas;
  std::vector<std::vector<double>> U, V;
  for (double d : s.deltas) {
    const double dt = d * d / 2;
    const int steps = static_cast<int>(std::lround(s.T / dt));
    if (std::abs(steps * dt - s.T) > 1e-12) throw ConfigError("T must be a multiple of delta^2/2");
    SpaceTimeGrid stg(g, 0.0, s.T, steps + 1);
    MollifierKernel k = make_mollifier(d, stg, s.shape);
    const double r = d / s.deltas.back();
    SpaceTimeNoiseStream stream(stg, s.seed, k, static_cast<int>(std::lround(r * r)));
    std::vector<double> c(N, 0.0);
    if (s.mode != CountertermMode::none) {
      c = counterterm_phi2(a, d, s.shape).values;
      if (s.mode == CountertermMode::constant) {
        double m = 0;
        for (double x : c) m += x;
        std::fill(c.begin(), c.end(), m / N);
      }
    }
    HeatStepper st(g, dt, lam), lin(g, dt, lam);
    const bool cst = a.constant();
    if (cst) {
      st.use_exponential(a.a.front());
      lin.use_exponential(a.a.front());
    }
    std::span<const Mat2> coeff = cst ? std::span<const Mat2>() : std::span<const Mat2>(a.a);
    std::vector<double> u(N, 0.0), z(N, 0.0), xi(N), F(N);
    for (int n = 0; n < steps; ++n) {
      stream.next(xi);
      for (std::size_t p = 0; p < N; ++p) F[p] = -hermite<double>(s.K, u[p], c[p]);
      if (s.K > 1) st.dealias(F);
      for (std::size_t p = 0; p < N; ++p) F[p] += xi[p];
      double before = detail::sup(u);
      st.step(u, F, coeff);
      lin.step(z, xi, coeff);
      if (detail::blew_up(before, detail::sup(u), 1e6)) {
        out.blowup = true;
        break;
      }
    }
    std::vector<double> v(N);
    for (std::size_t p = 0; p < N; ++p) v[p] = u[p] - z[p];
    out.sup_norms.push_back(detail::sup(u));
    U.push_back(std::move(u));
    V.push_back(std::move(v));
  }
  for (std::size_t i = 0; i + 1 < U.size(); ++i) {
    out.diffs.push_back(detail::sup_diff(U[i], U[i + 1]));
    out.remainder_diffs.push_back(detail::sup_diff(V[i], V[i + 1]));
  }
  out.finals = std::move(U);
  return out;
}

}  // namespace spde
