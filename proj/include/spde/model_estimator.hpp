#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coeff_field.hpp"
#include "errors.hpp"
#include "frozen_kernels.hpp"
#include "grid.hpp"
#include "mollifier_profile.hpp"
#include "noise.hpp"
#include "pde_solver.hpp"
#include "stats.hpp"
#include "wick_hermite.hpp"

namespace spde {

// phi^lambda_star(x) = lambda^-2 phi((x - star)/lambda); space-time adds lambda^-2 rho1((t - t_star)/lambda^2)
struct TestFunction {
  double cx = 0.5, cy = 0.5;
  double lambda = 0.25;
  MollifierShape shape = MollifierShape::bump;
  bool spacetime = false;
  double ct = 0.5;

  // sparse weights w_p with sum_p w_p f_p approximating the pairing; sum w_p = 1
  struct Weights {
    std::vector<std::size_t> idx;
    std::vector<double> w;
    double apply(std::span<const double> f) const {
      double s = 0;
      for (std::size_t k = 0; k < idx.size(); ++k) s += w[k] * f[idx[k]];
      return s;
    }
  };

  void check(const Grid2D& g) const {
    if (lambda < 4 * g.spacing()) throw UnresolvableScale("test function scale below 4 grid spacings");
    if (lambda > 0.5 * g.extent) throw UnresolvableScale("test function support exceeds the torus");
  }

  Weights spatial_weights(const Grid2D& g) const {
    check(g);
    Weights W;
    const double h = g.spacing();
    double sum = 0;
    for (int i = 0; i < g.n; ++i) {
      double dx = i * h - cx;
      dx -= g.extent * std::round(dx / g.extent);
      if (std::abs(dx) >= lambda) continue;
      for (int j = 0; j < g.n; ++j) {
        double dy = j * h - cy;
        dy -= g.extent * std::round(dy / g.extent);
        double r = std::sqrt(dx * dx + dy * dy) / lambda;
        if (r >= 1) continue;
        double v = profile_raw(shape, r);
        W.idx.push_back(g.index(i, j));
        W.w.push_back(v);
        sum += v;
      }
    }
    for (double& v : W.w) v /= sum;
    return W;
  }

  // continuum value lambda^-2 phi(r/lambda) with unit mass
  double value(double x, double y) const {
    double r = std::hypot(x - cx, y - cy) / lambda;
    return r < 1 ? profile_raw(shape, r) * profile_norm_2d(shape) / (lambda * lambda) : 0.0;
  }

  // steps k (time k*dt) with weights summing to 1
  std::vector<std::pair<int, double>> time_weights(double dt) const {
    std::vector<std::pair<int, double>> out;
    const double w = lambda * lambda;
    int k0 = static_cast<int>(std::ceil((ct - w) / dt)), k1 = static_cast<int>(std::floor((ct + w) / dt));
    double sum = 0;
    for (int k = std::max(k0, 0); k <= k1; ++k) {
      double r = std::abs(k * dt - ct) / w;
      if (r >= 1) continue;
      double v = profile_raw(shape, r);
      out.push_back({k, v});
      sum += v;
    }
    if (out.empty()) throw UnresolvableScale("time step too coarse for the test function");
    for (auto& p : out) p.second /= sum;
    return out;
  }
};

inline double pair(const Field2D& f, const TestFunction& tf) { return tf.spatial_weights(f.grid).apply(f.values); }

inline double pair(const SpaceTimeField& f, const TestFunction& tf) {
  if (!tf.spacetime) throw DimensionMismatch("space-time pairing needs a space-time test function");
  auto W = tf.spatial_weights(f.stgrid.grid);
  double s = 0;
  for (auto [k, w] : tf.time_weights(f.stgrid.dt())) {
    if (k >= f.stgrid.nt) throw UnresolvableScale("test function extends past the field");
    s += w * W.apply(f.slice(k));
  }
  return s;
}

// log-log slope of the q-th moment divided by q
inline double fit_exponent(const std::vector<double>& lambdas, const std::vector<double>& moments, int q) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    x.push_back(std::log(lambdas[i]));
    y.push_back(std::log(moments[i]));
  }
  return ols_slope(x, y) / q;
}

// samples[mode][delta][lambda][replica]
struct ProbeSamples {
  std::string object;
  std::vector<double> deltas, lambdas;
  std::size_t R = 0;
  int modes = 3;  // function, constant, none
  std::vector<double> data;

  void init(std::size_t nd, std::size_t nl, std::size_t r) {
    R = r;
    data.assign(modes * nd * nl * r, 0.0);
  }
  double& at(int m, std::size_t d, std::size_t l, std::size_t r) {
    return data[((m * deltas.size() + d) * lambdas.size() + l) * R + r];
  }
  double at(int m, std::size_t d, std::size_t l, std::size_t r) const {
    return data[((m * deltas.size() + d) * lambdas.size() + l) * R + r];
  }
  std::vector<double> column(int m, std::size_t d, std::size_t l) const {
    auto b = data.begin() + ((m * deltas.size() + d) * lambdas.size() + l) * R;
    return {b, b + R};
  }
};

struct MomentPoint {
  double lambda, delta, moment, se;
};

struct MomentStudy {
  std::string object;
  CountertermMode mode = CountertermMode::function;
  int q = 2;
  std::size_t replicas = 0;
  std::vector<MomentPoint> points;
  double alpha_hat = 0;  // at the smallest delta
  Interval alpha_ci;
  bool quality_warning = false;
  std::size_t ratio_lambda = 0;     // lambda index used for the delta ratios
  std::vector<double> delta_ratios;  // M(delta_{k+1}) / M(delta_k) at fixed lambda
  std::vector<double> cauchy;        // E|X_delta - X_{delta/2}|^q at the ratio lambda
};

inline int mode_index(CountertermMode m) {
  return m == CountertermMode::function ? 0 : m == CountertermMode::constant ? 1 : 2;
}

inline MomentStudy moment_study(const ProbeSamples& s, CountertermMode mode, int q, std::uint64_t seed,
                                std::size_t ratio_lambda = 0, int boot = 400) {
  if (s.R < 100) throw ConfigError("moment studies need at least 100 replicas");
  MomentStudy st;
  st.object = s.object;
  st.mode = mode;
  st.q = q;
  st.replicas = s.R;
  st.ratio_lambda = ratio_lambda;
  const int m = mode_index(mode);
  auto moment_of = [&](std::size_t d, std::size_t l, const std::vector<std::size_t>* idx) {
    double acc = 0;
    if (idx) {
      for (auto r : *idx) acc += std::pow(std::abs(s.at(m, d, l, r)), q);
      return acc / idx->size();
    }
    for (std::size_t r = 0; r < s.R; ++r) acc += std::pow(std::abs(s.at(m, d, l, r)), q);
    return acc / s.R;
  };
  for (std::size_t d = 0; d < s.deltas.size(); ++d)
    for (std::size_t l = 0; l < s.lambdas.size(); ++l) {
      std::vector<double> v(s.R);
      for (std::size_t r = 0; r < s.R; ++r) v[r] = std::pow(std::abs(s.at(m, d, l, r)), q);
      auto ms = mean_se(v);
      st.points.push_back({s.lambdas[l], s.deltas[d], ms.mean, ms.se});
    }
  const std::size_t dmin = s.deltas.size() - 1;
  auto alpha = [&](const std::vector<std::size_t>* idx) {
    std::vector<double> M;
    for (std::size_t l = 0; l < s.lambdas.size(); ++l) M.push_back(moment_of(dmin, l, idx));
    return fit_exponent(s.lambdas, M, q);
  };
  st.alpha_hat = alpha(nullptr);
  st.alpha_ci = bootstrap_ci(s.R, boot, seed, [&](const std::vector<std::size_t>& idx) { return alpha(&idx); });
  st.quality_warning = st.alpha_ci.width() > 0.15;
  for (std::size_t d = 0; d + 1 < s.deltas.size(); ++d) {
    st.delta_ratios.push_back(moment_of(d + 1, ratio_lambda, nullptr) / moment_of(d, ratio_lambda, nullptr));
    double acc = 0;
    for (std::size_t r = 0; r < s.R; ++r)
      acc += std::pow(std::abs(s.at(m, d + 1, ratio_lambda, r) - s.at(m, d, ratio_lambda, r)), q);
    st.cauchy.push_back(acc / s.R);
  }
  return st;
}

// ---- spatial setup: xi white noise on T^2, h = sigma_amp rho_s*xi + mu, a = A(h)

struct SpatialSetup {
  int n = 128;
  std::vector<double> deltas{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  std::vector<double> lambdas{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};
  MatrixMapSpec spec;
  double sigma_amp = 0, sigma_scale = 0.25;
  double mu0 = 0, mu_amp = 0;  // mu(x) = mu0 + mu_amp cos(2 pi x1)
  MollifierShape shape = MollifierShape::bump;
  std::size_t replicas = 400, pilot = 16;
  std::uint64_t seed = 1;
  bool serial = true;
  int q = 2;
  double dt = 0.01, T = 1.0;
  double cx = 0.5, cy = 0.5;
  int gi = 0, gj = 0;

  Grid2D grid() const {
    Grid2D g(n);
    return g;
  }
  double lambda_bound() const { return spec.lambda0 + 2 * spec.g_amp * std::max(1.0, 1.0 + spec.beta); }
  Field2D mu_field() const {
    Grid2D g = grid();
    Field2D m(g);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = mu0 + mu_amp * std::cos(2 * M_PI * g.coord(i));
    return m;
  }
  void validate() const {
    if (deltas.empty() || lambdas.empty()) throw ConfigError("delta and lambda lists must be nonempty");
    if (replicas < 2) throw ConfigError("need replicas >= 2");
    spec.validate();
  }
};

namespace detail {

struct SpatialContext {
  Grid2D g;
  std::vector<MollifierKernel> moll;
  std::optional<MollifierKernel> sigma;
  Field2D mu;
  SolverConfig cfg;
  double lam = 1;

  explicit SpatialContext(const SpatialSetup& s) : g(s.grid()), mu(s.mu_field()) {
    for (double d : s.deltas) moll.push_back(make_mollifier(d, g, s.shape));
    if (s.sigma_amp != 0) sigma = make_mollifier(s.sigma_scale, g, s.shape);
    cfg.dt = s.dt;
    cfg.T = s.T;
    lam = s.lambda_bound();
  }

  Field2D noise(std::uint64_t seed) const { return sample_white_noise_spatial(g, seed); }
  Field2D drift(const SpatialSetup& s, const Field2D& xi) const {
    return sigma ? correlated_drift(xi, *sigma, s.sigma_amp, mu) : mu;
  }
};

inline std::vector<double> table_field(const CountertermTable& t, const std::vector<double>& eta) {
  std::vector<double> v(eta.size());
  for (std::size_t p = 0; p < eta.size(); ++p) v[p] = t(eta[p]);
  return v;
}

}  // namespace detail

struct SpatialProbes {
  ProbeSamples xi_ixi, grad;
};

// One SHE solve per (replica, delta); both the recentred Xi*I(Xi) probe and the
// gradient product probe are read off the same solution.
inline SpatialProbes sample_spatial_probes(const SpatialSetup& s) {
  s.validate();
  detail::SpatialContext ctx(s);
  const std::size_t nd = s.deltas.size(), nl = s.lambdas.size(), R = s.replicas;
  std::vector<TestFunction::Weights> W;
  for (double l : s.lambdas) W.push_back(TestFunction{s.cx, s.cy, l, s.shape}.spatial_weights(ctx.g));
  const std::size_t star = ctx.g.index(static_cast<int>(std::lround(s.cx / ctx.g.spacing())),
                                       static_cast<int>(std::lround(s.cy / ctx.g.spacing())));
  std::vector<std::unique_ptr<CountertermTable>> txi, tb;
  for (double d : s.deltas) {
    txi.push_back(std::make_unique<CountertermTable>(s.spec, CountertermKind::pam_xi2, d, s.shape));
    tb.push_back(std::make_unique<CountertermTable>(s.spec, CountertermKind::pam_b2, d, s.shape, s.gi, s.gj));
  }
  // constant counterterms: spatial mean of the function counterterm over a pilot run
  std::vector<double> cxi(nd, 0.0), cb(nd, 0.0);
  for (std::size_t p = 0; p < s.pilot; ++p) {
    Field2D h = ctx.drift(s, ctx.noise(derive_seed(s.seed, 0x9170, p)));
    for (std::size_t d = 0; d < nd; ++d) {
      auto a = detail::table_field(*txi[d], h.values), b = detail::table_field(*tb[d], h.values);
      for (std::size_t q = 0; q < a.size(); ++q) {
        cxi[d] += a[q] / (a.size() * s.pilot);
        cb[d] += b[q] / (b.size() * s.pilot);
      }
    }
  }
  SpatialProbes out;
  out.xi_ixi.object = "xi_ixi";
  out.grad.object = "dixi_djxi(" + std::to_string(s.gi + 1) + "," + std::to_string(s.gj + 1) + ")";
  for (auto* ps : {&out.xi_ixi, &out.grad}) {
    ps->deltas = s.deltas;
    ps->lambdas = s.lambdas;
    ps->init(nd, nl, R);
  }
  parallel_for(R, s.serial, [&](std::size_t r) {
    Field2D xi = ctx.noise(derive_seed(s.seed, r));
    Field2D h = ctx.drift(s, xi);
    CoefficientField a = build_coefficient_field(h, s.spec);
    HeatStepper st(ctx.g, ctx.cfg.dt, ctx.lam);
    const std::size_t N = ctx.g.size();
    std::vector<double> prod(N), ux(N), uy(N), gp(N);
    for (std::size_t d = 0; d < nd; ++d) {
      Field2D xd = periodic_convolve(xi, ctx.moll[d]);
      Field2D u = solve_linear_she_final(a, xd, ctx.cfg, st);
      const double ustar = u.values[star];
      for (std::size_t p = 0; p < N; ++p) prod[p] = xd.values[p] * (u.values[p] - ustar);
      st.gradient(u.values, ux, uy);
      const auto& gi = s.gi == 0 ? ux : uy;
      const auto& gj = s.gj == 0 ? ux : uy;
      for (std::size_t p = 0; p < N; ++p) gp[p] = gi[p] * gj[p];
      auto cf = detail::table_field(*txi[d], h.values), bf = detail::table_field(*tb[d], h.values);
      for (std::size_t l = 0; l < nl; ++l) {
        double P = W[l].apply(prod), G = W[l].apply(gp);
        double C = W[l].apply(cf), B = W[l].apply(bf);
        out.xi_ixi.at(0, d, l, r) = P - C;
        out.xi_ixi.at(1, d, l, r) = P - cxi[d];
        out.xi_ixi.at(2, d, l, r) = P;
        out.grad.at(0, d, l, r) = G - B;
        out.grad.at(1, d, l, r) = G - cb[d];
        out.grad.at(2, d, l, r) = G;
      }
    }
  });
  return out;
}

inline MomentStudy estimate_xi_ixi_moments(const SpatialSetup& s, CountertermMode mode) {
  return moment_study(sample_spatial_probes(s).xi_ixi, mode, s.q, s.seed);
}

inline MomentStudy estimate_gradient_product_moments(SpatialSetup s, int i, int j, CountertermMode mode) {
  s.gi = i;
  s.gj = j;
  return moment_study(sample_spatial_probes(s).grad, mode, s.q, s.seed);
}

// ---- variance blow-up

struct BlowupRow {
  double delta;
  double var_constant, se_constant;  // SE from the bootstrap
  double var_function, se_function;
  double var_counterterm;  // Var (c_hat, phi)
  double target;           // log^2(delta)/(4 pi^2) Var (1/sqrt(det a), phi)
};

struct BlowupReport {
  std::vector<BlowupRow> rows;
  std::vector<double> ratio_constant, ratio_predicted, ratio_function;
  std::vector<Interval> ratio_constant_ci;
  double log2_coefficient = 0;  // OLS slope of V_constant against log^2 delta
  double var_inv_sqrt_det = 0;  // Var (1/sqrt(det a), phi)
  std::size_t replicas = 0;
  std::vector<double> samples_constant, samples_function;  // [delta][replica]
};

inline BlowupReport blowup_experiment(const SpatialSetup& s, const TestFunction& tf) {
  s.validate();
  detail::SpatialContext ctx(s);
  const std::size_t nd = s.deltas.size(), R = s.replicas;
  auto W = tf.spatial_weights(ctx.g);
  std::vector<std::unique_ptr<CountertermTable>> txi;
  for (double d : s.deltas)
    txi.push_back(std::make_unique<CountertermTable>(s.spec, CountertermKind::pam_xi2, d, s.shape));
  std::vector<double> Xc(nd * R), Xf(nd * R), Cc(nd * R), D(R);
  parallel_for(R, s.serial, [&](std::size_t r) {
    Field2D xi = ctx.noise(derive_seed(s.seed, r));
    Field2D h = ctx.drift(s, xi);
    CoefficientField a = build_coefficient_field(h, s.spec);
    HeatStepper st(ctx.g, ctx.cfg.dt, ctx.lam);
    std::vector<double> isd(a.det.size());
    for (std::size_t p = 0; p < isd.size(); ++p) isd[p] = 1 / std::sqrt(a.det[p]);
    D[r] = W.apply(isd);
    std::vector<double> prod(ctx.g.size());
    for (std::size_t d = 0; d < nd; ++d) {
      Field2D xd = periodic_convolve(xi, ctx.moll[d]);
      Field2D u = solve_linear_she_final(a, xd, ctx.cfg, st);
      for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = u.values[p] * xd.values[p];
      double P = W.apply(prod);
      double C = W.apply(detail::table_field(*txi[d], h.values));
      Xc[d * R + r] = P;  // a deterministic constant does not move the variance
      Xf[d * R + r] = P - C;
      Cc[d * R + r] = C;
    }
  });
  BlowupReport rep;
  rep.replicas = R;
  rep.samples_constant = Xc;
  rep.samples_function = Xf;
  rep.var_inv_sqrt_det = sample_variance(D);
  auto col = [&](const std::vector<double>& v, std::size_t d) {
    return std::vector<double>(v.begin() + d * R, v.begin() + (d + 1) * R);
  };
  auto var_idx = [&](const std::vector<double>& v, std::size_t d, const std::vector<std::size_t>& idx) {
    std::vector<double> x;
    x.reserve(idx.size());
    for (auto i : idx) x.push_back(v[d * R + i]);
    return sample_variance(x);
  };
  std::vector<double> L2, V;
  for (std::size_t d = 0; d < nd; ++d) {
    BlowupRow row;
    row.delta = s.deltas[d];
    row.var_constant = sample_variance(col(Xc, d));
    row.var_function = sample_variance(col(Xf, d));
    row.var_counterterm = sample_variance(col(Cc, d));
    double L = std::log(s.deltas[d]);
    row.target = L * L / (4 * M_PI * M_PI) * rep.var_inv_sqrt_det;
    auto ci_c = bootstrap_ci(R, 200, derive_seed(s.seed, 0xc1, d),
                             [&](const std::vector<std::size_t>& idx) { return var_idx(Xc, d, idx); });
    auto ci_f = bootstrap_ci(R, 200, derive_seed(s.seed, 0xc2, d),
                             [&](const std::vector<std::size_t>& idx) { return var_idx(Xf, d, idx); });
    row.se_constant = ci_c.width() / (2 * 1.96);
    row.se_function = ci_f.width() / (2 * 1.96);
    rep.rows.push_back(row);
    L2.push_back(L * L);
    V.push_back(row.var_constant);
  }
  rep.log2_coefficient = nd >= 2 ? ols_slope(L2, V) : 0;
  for (std::size_t d = 0; d + 1 < nd; ++d) {
    double L0 = std::log(s.deltas[d]), L1 = std::log(s.deltas[d + 1]);
    rep.ratio_constant.push_back(rep.rows[d + 1].var_constant / rep.rows[d].var_constant);
    rep.ratio_function.push_back(rep.rows[d + 1].var_function / rep.rows[d].var_function);
    rep.ratio_predicted.push_back((L1 * L1) / (L0 * L0));
    rep.ratio_constant_ci.push_back(
        bootstrap_ci(R, 200, derive_seed(s.seed, 0xc3, d), [&](const std::vector<std::size_t>& idx) {
          return var_idx(Xc, d + 1, idx) / var_idx(Xc, d, idx);
        }));
  }
  return rep;
}

// ---- space-time Hermite probe: H_N(<1>_delta, c^{<2>}) against parabolic test functions

struct PhiProbeSetup {
  int n = 128;
  std::vector<double> deltas{1.0 / 8, 1.0 / 16, 1.0 / 32};
  std::vector<double> lambdas{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};
  MatrixMapSpec spec;          // a(x) = A(mu(x)), deterministic
  double mu0 = 0, mu_amp = 0;  // mu(x) = mu0 + mu_amp cos(2 pi x1)
  MollifierShape shape = MollifierShape::bump;
  std::size_t replicas = 400;
  std::uint64_t seed = 1;
  bool serial = true;
  int q = 2;
  double t_star = 0.25;
  double cx = 0.5, cy = 0.5;

  void validate() const {
    if (deltas.empty() || lambdas.empty()) throw ConfigError("delta and lambda lists must be nonempty");
    double lmax = *std::max_element(lambdas.begin(), lambdas.end());
    if (t_star - lmax * lmax <= 0) throw ConfigError("t_star must exceed lambda_max^2");
    for (std::size_t d = 1; d < deltas.size(); ++d)
      if (std::abs(deltas[d - 1] / deltas[d] - 2) > 1e-12) throw ConfigError("delta list must halve");
    spec.validate();
  }
};

// samples for modes function (c^{<2>} field) and none (raw power); constant mode uses the spatial mean
inline ProbeSamples sample_phi_probe(const PhiProbeSetup& s, int N) {
  s.validate();
  Grid2D g(s.n);
  Field2D mu(g);
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) mu(i, j) = s.mu0 + s.mu_amp * std::cos(2 * M_PI * g.coord(i));
  CoefficientField a = build_coefficient_field(mu, s.spec);
  const std::size_t nd = s.deltas.size(), nl = s.lambdas.size(), R = s.replicas, NN = g.size();
  const double lmax = *std::max_element(s.lambdas.begin(), s.lambdas.end());
  std::vector<TestFunction::Weights> W;
  for (double l : s.lambdas) W.push_back(TestFunction{s.cx, s.cy, l, s.shape}.spatial_weights(g));
  std::vector<std::vector<double>> cfun(nd);
  std::vector<double> cconst(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    cfun[d] = counterterm_phi2(a, s.deltas[d], s.shape).values;
    double m = 0;
    for (double v : cfun[d]) m += v;
    cconst[d] = m / NN;
  }
  ProbeSamples out;
  out.object = "hermite_power(" + std::to_string(N) + ")";
  out.deltas = s.deltas;
  out.lambdas = s.lambdas;
  out.init(nd, nl, R);
  const double lam = a.max_eigenvalue();
  const bool cst = a.constant();
  // supports are nested balls around the same centre
  const auto& support = W[std::max_element(s.lambdas.begin(), s.lambdas.end()) - s.lambdas.begin()].idx;
  parallel_for(R, s.serial, [&](std::size_t r) {
    std::vector<double> u(NN), xi(NN), hf(NN), hc(NN), hn(NN);
    for (std::size_t d = 0; d < nd; ++d) {
      const double delta = s.deltas[d], dt = delta * delta / 2;
      SpaceTimeGrid stg(g, 0.0, s.t_star + lmax * lmax + 2 * dt, static_cast<int>(std::ceil((s.t_star + lmax * lmax) / dt)) + 2);
      MollifierKernel k = make_mollifier(delta, stg, s.shape);
      const double ratio = delta / s.deltas.back();
      const int refine = static_cast<int>(std::lround(ratio * ratio));
      SpaceTimeNoiseStream stream(stg, derive_seed(s.seed, r), k, refine);
      HeatStepper st(g, dt, lam);
      if (cst) st.use_exponential(a.a.front());
      std::vector<std::vector<std::pair<int, double>>> tw;
      int kend = 0;
      for (double l : s.lambdas) {
        TestFunction tf{s.cx, s.cy, l, s.shape, true, s.t_star};
        tw.push_back(tf.time_weights(dt));
        kend = std::max(kend, tw.back().back().first);
      }
      std::fill(u.begin(), u.end(), 0.0);
      for (int step = 0; step <= kend; ++step) {
        // u holds <1> at time step*dt
        bool any = false;
        for (auto& v : tw)
          for (auto& [kk, w] : v)
            if (kk == step) any = true;
        if (any) {
          for (std::size_t p : support) {
            hf[p] = hermite<double>(N, u[p], cfun[d][p]);
            hc[p] = hermite<double>(N, u[p], cconst[d]);
            hn[p] = std::pow(u[p], N);
          }
          for (std::size_t l = 0; l < nl; ++l)
            for (auto& [kk, w] : tw[l])
              if (kk == step) {
                out.at(0, d, l, r) += w * W[l].apply(hf);
                out.at(1, d, l, r) += w * W[l].apply(hc);
                out.at(2, d, l, r) += w * W[l].apply(hn);
              }
        }
        if (step == kend) break;
        stream.next(xi);
        st.step(u, xi, a.a);
      }
    }
  });
  return out;
}

inline MomentStudy phi_hermite_moment_study(const PhiProbeSetup& s, int N, CountertermMode mode) {
  return moment_study(sample_phi_probe(s, N), mode, s.q, s.seed);
}

}  // namespace spde
