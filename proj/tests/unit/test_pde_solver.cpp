#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "spde/convergence.hpp"
#include "spde/frozen_kernels.hpp"
#include "spde/noise.hpp"
#include "spde/pde_solver.hpp"

using namespace spde;
using Catch::Approx;

namespace {
Field2D mode(const Grid2D& g, int k1, int k2) {
  Field2D f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) f(i, j) = std::cos(2 * M_PI * (k1 * g.coord(i) + k2 * g.coord(j)));
  return f;
}
double amplitude(const Field2D& f, const Field2D& m) {
  double s = 0, n = 0;
  for (std::size_t q = 0; q < f.size(); ++q) s += f.values[q] * m.values[q], n += m.values[q] * m.values[q];
  return s / n;
}
}  // namespace

TEST_CASE("single heat step") {
  Grid2D g(32);
  auto a = constant_coefficient_field(g, {1, 0, 1});
  SolverConfig cfg;
  cfg.dt = 1e-4;
  auto m = mode(g, 1, 2);
  auto u = heat_step(a, m, Field2D(g), cfg);
  const double s = 4 * M_PI * M_PI * 5 * cfg.dt;
  CHECK(std::abs(amplitude(u, m) - std::exp(-s)) < s * s);

  auto v = heat_step(a, Field2D(g), Field2D(g, 2.5), cfg);
  CHECK(v.mean() == Approx(2.5 * cfg.dt).epsilon(1e-13));

  MatrixMapSpec spec;
  spec.g_amp = 1;
  auto av = build_coefficient_field(sample_white_noise_spatial(g, 1), spec);
  auto w = heat_step(av, Field2D(g, 1.75), Field2D(g), cfg);
  for (double x : w.values) CHECK(x == Approx(1.75).epsilon(1e-13));

  CHECK_THROWS_AS(heat_step(a, Field2D(g), Field2D(g, 1e12), cfg), InstabilityDetected);
  cfg.dt = 0;
  CHECK_THROWS_AS(heat_step(a, Field2D(g), Field2D(g), cfg), NonpositiveTime);
  CHECK_THROWS_AS(heat_step(a, Field2D(Grid2D(16)), Field2D(g), SolverConfig{}), GridMismatch);
}

TEST_CASE("linear SHE") {
  Grid2D g(64);
  auto a = constant_coefficient_field(g, {1, 0, 1});
  SolverConfig cfg;
  cfg.dt = 1e-4;
  cfg.T = 1;
  auto z = solve_linear_she(a, Field2D(g), cfg);
  CHECK(z.final().sup_norm() == 0.0);
  auto m = mode(g, 1, 0);
  auto tr = solve_linear_she(a, m, cfg);
  const double s = 4 * M_PI * M_PI;
  CHECK(amplitude(tr.final(), m) == Approx((1 - std::exp(-s)) / s).epsilon(0.01));
}

TEST_CASE("linear SHE self-convergence under refinement") {
  MatrixMapSpec spec;
  spec.g_amp = 1;
  std::vector<Field2D> sols;
  for (int n : {32, 64, 128}) {
    Grid2D g(n);
    Field2D h(g), xi(g);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double x = g.coord(i), y = g.coord(j);
        h(i, j) = std::cos(2 * M_PI * x) * std::sin(2 * M_PI * y);
        xi(i, j) = std::exp(std::sin(2 * M_PI * x) + 0.5 * std::cos(4 * M_PI * y));
      }
    SolverConfig cfg;
    cfg.dt = 4e-3 * 32 / n;
    cfg.T = 0.25;
    sols.push_back(solve_linear_she(build_coefficient_field(h, spec), xi, cfg).final());
  }
  auto diff = [&](const Field2D& c, const Field2D& f) {
    double m = 0;
    int r = f.grid.n / c.grid.n;
    for (int i = 0; i < c.grid.n; ++i)
      for (int j = 0; j < c.grid.n; ++j) m = std::max(m, std::abs(c(i, j) - f(r * i, r * j)));
    return m;
  };
  double d1 = diff(sols[0], sols[1]), d2 = diff(sols[1], sols[2]);
  CHECK(d2 < d1);
}

TEST_CASE("PAM structural reductions") {
  Grid2D g(32);
  MatrixMapSpec spec;
  spec.g_amp = 1;
  auto xi = periodic_convolve(sample_white_noise_spatial(g, 4), make_mollifier(0.125, g));
  auto a = build_coefficient_field(correlated_drift(xi, make_mollifier(0.25, g), 1.0, Field2D(g)), spec);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.05;
  PamCounterterms ct;
  ct.xi2.assign(g.size(), 0.3);
  ct.b11.assign(g.size(), 0.1);
  ct.b12.assign(g.size(), 0.02);
  ct.b22.assign(g.size(), 0.1);

  auto u0 = mode(g, 1, 1);
  PamNonlinearity zero;
  auto tr = solve_pam_renormalized(a, xi, ct, zero, u0, cfg);
  Field2D u = u0;
  for (int k = 0; k < cfg.steps(); ++k) u = heat_step(a, u, Field2D(g), cfg);
  CHECK(tr.final().values == u.values);

  PamNonlinearity one;
  one.g = SmoothFn::make_constant(1);
  auto p = solve_pam_renormalized(a, xi, ct, one, Field2D(g), cfg);
  auto s = solve_linear_she(a, xi, cfg);
  CHECK(p.final().values == s.final().values);
}

TEST_CASE("stochastic convolution") {
  Grid2D g(64);
  SpaceTimeGrid st(g, 0, 0.5, 500);
  auto a = constant_coefficient_field(g, {1, 0, 1});
  auto z = stochastic_convolution(a, SpaceTimeField(st));
  for (double v : z.values) CHECK(v == 0.0);
  // xi(t,x) = sin(pi t) cos(2 pi x): A' = -s A + sin(pi t)
  SpaceTimeField xi(st);
  auto m = mode(g, 1, 0);
  for (int k = 0; k < st.nt; ++k)
    for (std::size_t q = 0; q < g.size(); ++q) xi.values[k * g.size() + q] = std::sin(M_PI * st.time(k)) * m.values[q];
  auto u = stochastic_convolution(a, xi);
  const double s = 4 * M_PI * M_PI, t = st.time(st.nt - 1);
  const double w = M_PI;
  double exact = (s * std::sin(w * t) - w * std::cos(w * t) + w * std::exp(-s * t)) / (s * s + w * w);
  CHECK(amplitude(u.slice_field(st.nt - 1), m) == Approx(exact).epsilon(0.02));
}

TEST_CASE("phi equation") {
  Grid2D g(32);
  auto a = constant_coefficient_field(g, {1, 0, 1});
  SpaceTimeGrid st(g, 0, 1, 1000);
  SpaceTimeField xi(st);
  auto m = mode(g, 1, 0);
  for (int k = 0; k < st.nt; ++k)
    for (std::size_t q = 0; q < g.size(); ++q) xi.values[k * g.size() + q] = m.values[q];
  std::vector<double> c(g.size(), 0.3);
  auto tr = solve_phi_renormalized(a, xi, c, 1, Field2D(g), 1.0);
  const double s = 4 * M_PI * M_PI + 1;
  CHECK(amplitude(tr.final(), m) == Approx((1 - std::exp(-s)) / s).epsilon(0.01));
  CHECK_THROWS_AS(solve_phi_renormalized(a, xi, c, 0, Field2D(g), 1.0), ConfigError);
}

TEST_CASE("phi^4 stays finite across seeds") {
  Grid2D g(64);
  auto a = constant_coefficient_field(g, {1, 0, 1});
  const double d = 1.0 / 16, dt = d * d / 2;
  SpaceTimeGrid st(g, 0, 1, static_cast<int>(std::lround(1 / dt)));
  auto k = make_mollifier(d, st);
  auto c = counterterm_phi2(a, d).values;
  for (int seed = 0; seed < 20; ++seed) {
    auto xi = periodic_convolve(sample_white_noise_spacetime(st, 300 + seed), k);
    auto tr = solve_phi_renormalized(a, xi, c, 3, Field2D(g), 1.0);
    CHECK_FALSE(tr.blowup);
    CHECK(tr.final().all_finite());
  }
}

TEST_CASE("g-PAM small data self-convergence") {
  PamConvergenceSetup s;
  s.deltas = {1.0 / 8, 1.0 / 16, 1.0 / 32};
  s.spec.g_amp = 1;
  s.sigma_amp = 1;
  s.nl.g = SmoothFn::make_tanh(0.1, 1, 1);
  s.nl.f = SmoothFn::make_constant(0.05);
  auto r = pam_self_convergence(s);
  REQUIRE(r.diffs.size() == 2);
  CHECK(r.diffs[1] < r.diffs[0]);
  CHECK_FALSE(r.blowup);
  s.deltas = {1.0 / 8, 1.0 / 32};
  CHECK_THROWS_AS(pam_self_convergence(s), ConfigError);
}

TEST_CASE("checkpoint round trip") {
  Grid2D g(16);
  auto f = sample_white_noise_spatial(g, 9);
  const std::string path = "test_ckpt.bin";
  write_checkpoint(path, f, 0.75);
  auto [h, t] = read_checkpoint(path);
  CHECK(t == 0.75);
  CHECK(h.values == f.values);
  std::FILE* fp = std::fopen(path.c_str(), "r+b");
  std::fputc('X', fp);
  std::fclose(fp);
  CHECK_THROWS_AS(read_checkpoint(path), ParseError);
  std::remove(path.c_str());
}
