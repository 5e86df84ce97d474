#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "config.hpp"
#include "convergence.hpp"
#include "frozen_kernels.hpp"
#include "hq_fixtures.hpp"
#include "hq_graphs.hpp"
#include "io.hpp"
#include "model_estimator.hpp"
#include "pairings.hpp"
#include "pde_solver.hpp"
#include "stats.hpp"
#include "wick_hermite.hpp"

namespace spde::cli {

struct RunOptions {
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  bool serial = false;
};

// ---- shared config readers

inline const std::set<std::string> kCommonKeys = {
    "run.seed",         "run.replicas",      "run.serial",       "grid.n",          "noise.shape",
    "matrix.family",    "matrix.lambda0",    "matrix.g_amp",     "matrix.g_slope",  "matrix.g_center",
    "matrix.beta",      "matrix.theta_amp",  "matrix.theta_slope", "field.sigma_amp", "field.sigma_scale",
    "field.mu0",        "field.mu_amp"};

inline std::set<std::string> keys_with(std::initializer_list<std::string> extra) {
  std::set<std::string> k = kCommonKeys;
  k.insert(extra.begin(), extra.end());
  return k;
}

inline MatrixMapSpec read_spec(const Config& c) {
  MatrixMapSpec s;
  s.family = c.str("matrix.family", s.family);
  s.lambda0 = c.num("matrix.lambda0", s.lambda0);
  s.g_amp = c.num("matrix.g_amp", s.g_amp);
  s.g_slope = c.num("matrix.g_slope", s.g_slope);
  s.g_center = c.num("matrix.g_center", s.g_center);
  s.beta = c.num("matrix.beta", s.beta);
  s.theta_amp = c.num("matrix.theta_amp", s.theta_amp);
  s.theta_slope = c.num("matrix.theta_slope", s.theta_slope);
  s.validate();
  return s;
}

inline std::uint64_t seed_of(const Config& c, const RunOptions& o) { return o.seed ? *o.seed : c.u64("run.seed", 1); }
inline std::size_t replicas_of(const Config& c, const RunOptions& o, std::size_t dflt) {
  if (o.replicas) return *o.replicas;
  long long r = c.integer("run.replicas", static_cast<long long>(dflt));
  if (r < 1) throw ConfigError("run.replicas must be positive");
  return static_cast<std::size_t>(r);
}
inline bool serial_of(const Config& c, const RunOptions& o) { return o.serial || c.flag("run.serial", false); }
inline int grid_n(const Config& c) { return static_cast<int>(c.integer("grid.n", 128)); }
inline MollifierShape shape_of(const Config& c) {
  try {
    return parse_shape(c.str("noise.shape", "bump"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("noise.shape: ") + e.what());
  }
}

inline void check_deltas(const std::vector<double>& d, int n, const std::string& key) {
  if (d.empty()) throw ConfigError("'" + key + "' is empty");
  const double h = 1.0 / n;
  for (double x : d)
    if (!(x >= 2 * h - 1e-15) || x > 1) throw ConfigError("'" + key + "' entry " + fmt(x) + " not in [2h, 1]");
}

inline std::vector<CountertermMode> read_modes(const Config& c, const std::string& key) {
  std::vector<CountertermMode> m;
  if (!c.has(key)) return {CountertermMode::function, CountertermMode::constant, CountertermMode::none};
  for (auto& w : c.words(key)) m.push_back(parse_mode(w));
  return m;
}

inline SpatialSetup read_spatial(const Config& c, const RunOptions& o, const std::string& sec) {
  SpatialSetup s;
  s.n = grid_n(c);
  s.spec = read_spec(c);
  s.sigma_amp = c.num("field.sigma_amp", 0);
  s.sigma_scale = c.num("field.sigma_scale", 0.25);
  s.mu0 = c.num("field.mu0", 0);
  s.mu_amp = c.num("field.mu_amp", 0);
  s.shape = shape_of(c);
  s.replicas = replicas_of(c, o, 400);
  s.seed = seed_of(c, o);
  s.serial = serial_of(c, o);
  s.deltas = c.list(sec + ".deltas");
  check_deltas(s.deltas, s.n, sec + ".deltas");
  s.dt = c.num(sec + ".dt", 0.01);
  s.T = c.num(sec + ".T", 1.0);
  s.cx = c.num(sec + ".cx", 0.5);
  s.cy = c.num(sec + ".cy", 0.5);
  return s;
}

inline Stamp stamp(const Config& c, std::uint64_t seed, const std::string& cmd) { return {c.hash(), seed, cmd}; }

// ---- counterterms

inline int cmd_counterterms(const Config& c, const RunOptions& o) {
  c.reject_unknown(keys_with({"counterterms.kinds", "counterterms.deltas", "counterterms.a11", "counterterms.a12",
                              "counterterms.a22", "counterterms.i", "counterterms.j"}));
  const auto deltas = c.list("counterterms.deltas");
  for (double d : deltas)
    if (!(d > 0 && d <= 1)) throw ConfigError("counterterms.deltas entries must lie in (0,1]");
  Mat2 a{c.num("counterterms.a11", 1), c.num("counterterms.a12", 0), c.num("counterterms.a22", 1)};
  auto di = det_inverse(a);
  if (!(a.a11 > 0 && di.det > 0)) throw EllipticityViolation("counterterms matrix is not positive definite");
  const int i = static_cast<int>(c.integer("counterterms.i", 1)) - 1;
  const int j = static_cast<int>(c.integer("counterterms.j", 1)) - 1;
  if (i < 0 || i > 1 || j < 0 || j > 1) throw ConfigError("counterterms.i/j must be 1 or 2");
  const auto shape = shape_of(c);
  std::vector<std::string> kinds = c.has("counterterms.kinds") ? c.words("counterterms.kinds")
                                                               : std::vector<std::string>{"pam_xi2", "pam_b2", "phi2"};
  const std::uint64_t seed = seed_of(c, o);
  ensure_dir(o.out);
  auto st = stamp(c, seed, "counterterms");
  auto summary = stamped(st);
  summary["matrix"] = {a.a11, a.a12, a.a22};
  for (const auto& kname : kinds) {
    CountertermKind kind;
    if (kname == "pam_xi2") kind = CountertermKind::pam_xi2;
    else if (kname == "pam_b2") kind = CountertermKind::pam_b2;
    else if (kname == "phi2") kind = CountertermKind::phi2;
    else throw ConfigError("counterterms.kinds: unknown kind '" + kname + "'");
    CsvWriter csv(o.out + "/counterterms_" + kname + ".csv", st, {"delta", "abs_log_delta", "value"});
    std::vector<double> x, y;
    for (double d : deltas) {
      double v = counterterm_value(kind, a, d, shape, i, j, {});
      csv.row({fmt(d), fmt(-std::log(d)), fmt(v)});
      x.push_back(-std::log(d));
      y.push_back(v);
    }
    nlohmann::ordered_json k;
    k["deltas"] = deltas.size();
    if (x.size() >= 2) k["slope"] = ols_slope(x, y);
    const double sq = std::sqrt(di.det);
    if (kind == CountertermKind::pam_xi2) k["predicted_slope"] = 1 / (2 * M_PI * sq);
    if (kind == CountertermKind::pam_b2) {
      double inv = i == 0 && j == 0 ? di.inv.a11 : (i == 1 && j == 1 ? di.inv.a22 : di.inv.a12);
      k["predicted_slope"] = inv / (4 * M_PI * sq);
      k["i"] = i + 1;
      k["j"] = j + 1;
    }
    summary["kinds"][kname] = k;
  }
  write_json(o.out + "/counterterms_summary.json", summary);
  return 0;
}

// ---- simulate

inline int cmd_simulate(const Config& c, const RunOptions& o) {
  c.reject_unknown(keys_with({"simulate.equation", "simulate.mode", "simulate.deltas", "simulate.T", "simulate.dt",
                              "simulate.K", "simulate.g_amp", "simulate.g_slope", "simulate.g_offset",
                              "simulate.f", "simulate.write_fields"}));
  const std::string eq = c.str("simulate.equation");
  if (eq != "pam" && eq != "phi") throw ConfigError("simulate.equation must be pam or phi");
  if (c.has("simulate.K") && c.integer("simulate.K") < 1) throw ConfigError("simulate.K must be >= 1");
  if (eq == "pam" && c.has("simulate.K")) throw ConfigError("simulate.K applies to the phi equation only");
  const auto mode = parse_mode(c.str("simulate.mode", "function"));
  const std::uint64_t seed = seed_of(c, o);
  const int n = grid_n(c);
  auto deltas = c.list("simulate.deltas");
  check_deltas(deltas, n, "simulate.deltas");
  ConvergenceStudy st;
  if (eq == "pam") {
    PamConvergenceSetup s;
    s.n = n;
    s.deltas = deltas;
    s.spec = read_spec(c);
    s.sigma_amp = c.num("field.sigma_amp", 0);
    s.sigma_scale = c.num("field.sigma_scale", 0.25);
    s.mu0 = c.num("field.mu0", 0);
    s.mu_amp = c.num("field.mu_amp", 0);
    s.shape = shape_of(c);
    s.seed = seed;
    s.dt = c.num("simulate.dt", 1.0 / 1024);
    s.T = c.num("simulate.T", 0.25);
    s.nl.g = SmoothFn::make_tanh(c.num("simulate.g_amp", 0.1), c.num("simulate.g_slope", 1),
                                 c.num("simulate.g_offset", 1));
    s.nl.f = SmoothFn::make_constant(c.num("simulate.f", 0.05));
    s.mode = mode;
    st = pam_self_convergence(s);
  } else {
    PhiConvergenceSetup s;
    s.n = n;
    s.deltas = deltas;
    s.spec = read_spec(c);
    if (c.num("field.sigma_amp", 0) != 0) throw ConfigError("field.sigma_amp: the phi driver uses deterministic a");
    s.mu0 = c.num("field.mu0", 0);
    s.mu_amp = c.num("field.mu_amp", 0);
    s.shape = shape_of(c);
    s.seed = seed;
    s.K = static_cast<int>(c.integer("simulate.K", 3));
    s.T = c.num("simulate.T", 0.25);
    s.mode = mode;
    st = phi_self_convergence(s);
  }
  ensure_dir(o.out);
  auto sp = stamp(c, seed, "simulate");
  {
    std::vector<std::string> cols{"delta", "delta_half", "sup_diff"};
    if (eq == "phi") cols.push_back("remainder_sup_diff");
    CsvWriter csv(o.out + "/convergence.csv", sp, cols);
    for (std::size_t k = 0; k < st.diffs.size(); ++k) {
      std::vector<std::string> r{fmt(st.deltas[k]), fmt(st.deltas[k + 1]), fmt(st.diffs[k])};
      if (eq == "phi") r.push_back(fmt(st.remainder_diffs[k]));
      csv.row(r);
    }
  }
  if (c.flag("simulate.write_fields", true)) {
    Grid2D g(n);
    for (std::size_t k = 0; k < st.finals.size(); ++k) {
      Field2D f(g);
      f.values = st.finals[k];
      write_checkpoint(o.out + "/u_delta" + std::to_string(k) + ".ckpt", f, c.num("simulate.T", 0.25));
    }
  }
  auto j = stamped(sp);
  j["equation"] = eq;
  j["mode"] = mode_name(mode);
  j["deltas"] = st.deltas;
  j["sup_diffs"] = st.diffs;
  if (eq == "phi") j["remainder_sup_diffs"] = st.remainder_diffs;
  j["sup_norms"] = st.sup_norms;
  j["strictly_decreasing"] = st.strictly_decreasing();
  j["blowup"] = st.blowup;
  write_json(o.out + "/simulate.json", j);
  return 0;
}

// ---- blowup

inline nlohmann::ordered_json blowup_json(const BlowupReport& r) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::array();
  for (auto& x : r.rows)
    rows.push_back({{"delta", x.delta},
                    {"var_constant", x.var_constant},
                    {"se_constant", x.se_constant},
                    {"var_function", x.var_function},
                    {"se_function", x.se_function},
                    {"var_counterterm", x.var_counterterm},
                    {"target", x.target}});
  j["rows"] = rows;
  j["ratio_constant"] = r.ratio_constant;
  j["ratio_predicted"] = r.ratio_predicted;
  j["ratio_function"] = r.ratio_function;
  auto ci = nlohmann::ordered_json::array();
  for (auto& x : r.ratio_constant_ci) ci.push_back({x.lo, x.hi});
  j["ratio_constant_ci"] = ci;
  j["log2_coefficient"] = r.log2_coefficient;
  j["log2_coefficient_predicted"] = r.var_inv_sqrt_det / (4 * M_PI * M_PI);
  j["var_inv_sqrt_det"] = r.var_inv_sqrt_det;
  j["replicas"] = r.replicas;
  return j;
}

inline int cmd_blowup(const Config& c, const RunOptions& o) {
  c.reject_unknown(keys_with({"blowup.deltas", "blowup.lambda", "blowup.cx", "blowup.cy", "blowup.dt", "blowup.T"}));
  SpatialSetup s = read_spatial(c, o, "blowup");
  TestFunction tf{s.cx, s.cy, c.num("blowup.lambda", 0.25), s.shape};
  auto r = blowup_experiment(s, tf);
  ensure_dir(o.out);
  auto sp = stamp(c, s.seed, "blowup");
  CsvWriter csv(o.out + "/blowup.csv", sp,
                {"delta", "var_constant", "se_constant", "var_function", "se_function", "var_counterterm", "target"});
  for (auto& x : r.rows)
    csv.row({fmt(x.delta), fmt(x.var_constant), fmt(x.se_constant), fmt(x.var_function), fmt(x.se_function),
             fmt(x.var_counterterm), fmt(x.target)});
  auto j = stamped(sp);
  j.update(blowup_json(r));
  write_json(o.out + "/blowup.json", j);
  return 0;
}

// ---- moments

inline nlohmann::ordered_json study_json(const MomentStudy& m) {
  nlohmann::ordered_json j;
  j["object"] = m.object;
  j["mode"] = mode_name(m.mode);
  j["q"] = m.q;
  j["replicas"] = m.replicas;
  j["alpha_hat"] = m.alpha_hat;
  j["alpha_ci"] = {m.alpha_ci.lo, m.alpha_ci.hi};
  j["quality_warning"] = m.quality_warning;
  j["delta_ratios"] = m.delta_ratios;
  j["cauchy"] = m.cauchy;
  return j;
}

inline int cmd_moments(const Config& c, const RunOptions& o) {
  c.reject_unknown(keys_with({"moments.object", "moments.modes", "moments.deltas", "moments.lambdas", "moments.q",
                              "moments.i", "moments.j", "moments.N", "moments.t_star", "moments.dt", "moments.T",
                              "moments.cx", "moments.cy", "moments.pilot"}));
  const std::string obj = c.str("moments.object");
  const int q = static_cast<int>(c.integer("moments.q", 2));
  if (q < 1) throw ConfigError("moments.q must be >= 1");
  const auto modes = read_modes(c, "moments.modes");
  const auto lambdas = c.list("moments.lambdas");
  ProbeSamples samples;
  std::uint64_t seed = 0;
  std::size_t R = 0;
  if (obj == "xi_ixi" || obj == "gradient") {
    SpatialSetup s = read_spatial(c, o, "moments");
    s.lambdas = lambdas;
    s.q = q;
    s.pilot = static_cast<std::size_t>(c.integer("moments.pilot", 16));
    s.gi = static_cast<int>(c.integer("moments.i", 1)) - 1;
    s.gj = static_cast<int>(c.integer("moments.j", 1)) - 1;
    if (s.gi < 0 || s.gi > 1 || s.gj < 0 || s.gj > 1) throw ConfigError("moments.i/j must be 1 or 2");
    for (double l : lambdas) TestFunction{s.cx, s.cy, l}.check(Grid2D(s.n));
    auto P = sample_spatial_probes(s);
    samples = obj == "xi_ixi" ? P.xi_ixi : P.grad;
    seed = s.seed;
    R = s.replicas;
  } else if (obj == "hermite") {
    if (c.num("field.sigma_amp", 0) != 0) throw ConfigError("field.sigma_amp: the hermite probe uses deterministic a");
    PhiProbeSetup s;
    s.n = grid_n(c);
    s.deltas = c.list("moments.deltas");
    check_deltas(s.deltas, s.n, "moments.deltas");
    s.lambdas = lambdas;
    s.spec = read_spec(c);
    s.mu0 = c.num("field.mu0", 0);
    s.mu_amp = c.num("field.mu_amp", 0);
    s.shape = shape_of(c);
    s.replicas = replicas_of(c, o, 400);
    s.seed = seed_of(c, o);
    s.serial = serial_of(c, o);
    s.q = q;
    s.t_star = c.num("moments.t_star", 0.25);
    s.cx = c.num("moments.cx", 0.5);
    s.cy = c.num("moments.cy", 0.5);
    for (double l : lambdas) TestFunction{s.cx, s.cy, l}.check(Grid2D(s.n));
    samples = sample_phi_probe(s, static_cast<int>(c.integer("moments.N", 2)));
    seed = s.seed;
    R = s.replicas;
  } else {
    throw ConfigError("moments.object must be xi_ixi, gradient or hermite");
  }
  if (R < 100) throw ConfigError("moment studies need run.replicas >= 100");
  ensure_dir(o.out);
  auto sp = stamp(c, seed, "moments");
  CsvWriter csv(o.out + "/moments.csv", sp, {"object", "mode", "lambda", "delta", "moment", "se"});
  auto j = stamped(sp);
  j["studies"] = nlohmann::ordered_json::array();
  for (auto m : modes) {
    auto st = moment_study(samples, m, q, seed);
    for (auto& p : st.points)
      csv.row({st.object, mode_name(m), fmt(p.lambda), fmt(p.delta), fmt(p.moment), fmt(p.se)});
    j["studies"].push_back(study_json(st));
    if (st.quality_warning)
      std::cerr << "warning: " << st.object << " (" << mode_name(m) << ") exponent CI width "
                << st.alpha_ci.width() << " > 0.15\n";
  }
  write_json(o.out + "/moments.json", j);
  return 0;
}

// ---- check-graph

inline Kappas parse_kappas(const std::string& s) {
  Kappas k;
  if (s.empty()) return k;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::is_any_of(","));
  if (parts.size() != 3) throw ConfigError("--kappa expects k,k1,k2");
  try {
    k.k = parse_rational(boost::algorithm::trim_copy(parts[0]));
    k.k1 = parse_rational(boost::algorithm::trim_copy(parts[1]));
    k.k2 = parse_rational(boost::algorithm::trim_copy(parts[2]));
  } catch (const ParseError& e) {
    throw ConfigError(std::string("--kappa: ") + e.what());
  }
  return k;
}

inline std::string table(const CheckReport& r, const LabelledDiagram& g) {
  std::ostringstream s;
  s << "diagram " << r.diagram << "  assumption " << r.assumption << "  kappa (" << to_string(r.kappa.k) << ", "
    << to_string(r.kappa.k1) << ", " << to_string(r.kappa.k2) << ")\n";
  for (auto& v : r.items) {
    s << "  item " << v.item << "  " << (v.pass ? "PASS" : "FAIL") << "  subsets " << v.subsets_checked;
    if (!v.pass) {
      s << "  witness {";
      auto nm = g.names(v.witness);
      for (std::size_t i = 0; i < nm.size(); ++i) s << (i ? "," : "") << nm[i];
      s << "}  " << to_string(v.lhs) << " " << v.relation << " " << to_string(v.rhs) << " violated";
    }
    s << "\n";
  }
  s << "  alpha " << to_string(r.alpha);
  if (r.assumption == "weak") s << "  R " << to_string(r.R);
  s << "\n  verdict " << (r.pass() ? "PASS" : "FAIL") << "\n";
  return s.str();
}

inline int cmd_check_graph(const std::string& path, const std::string& kappa, const std::string& assumption,
                           const RunOptions& o, bool write_out) {
  auto g = load_diagram(path);
  auto kp = parse_kappas(kappa);
  if (assumption != "full" && assumption != "weak") throw ConfigError("--assumption must be full or weak");
  auto r = assumption == "full" ? check_assumption_full(g, kp) : check_assumption_weak(g, kp);
  std::cout << table(r, g);
  auto j = to_json(r, g);
  if (write_out) {
    ensure_dir(o.out);
    write_json(o.out + "/" + (g.name.empty() ? std::string("diagram") : g.name) + "_report.json", j);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

// ---- pairings

inline int cmd_pairings(int size, const std::string& cls_name, int N, bool list) {
  if (size < 0) throw ConfigError("--size must be nonnegative");
  if (size > 16) throw TooLarge("--size above 16");
  if (N < 1) throw ConfigError("--N must be >= 1");
  PairingClass cls{parse_pairing_kind(cls_name), N};
  std::size_t count = 0;
  for_each_pairing(iota_set(size), cls, [&](const std::vector<std::pair<int, int>>& b) {
    ++count;
    if (list) {
      for (std::size_t i = 0; i < b.size(); ++i) std::cout << (i ? " " : "") << "{" << b[i].first << "," << b[i].second << "}";
      std::cout << "\n";
    }
  });
  std::cout << "count " << count << "\n";
  return 0;
}

// ---- selftest: fast internal consistency checks

inline int cmd_selftest(std::ostream& os) {
  int failures = 0;
  auto check = [&](const std::string& what, bool ok) {
    os << (ok ? "ok   " : "FAIL ") << what << "\n";
    if (!ok) ++failures;
  };
  {
    std::vector<double> l{0.5, 0.25, 0.125, 0.0625}, m;
    for (double x : l) m.push_back(std::pow(x, 2 * -0.3));
    check("exponent regression recovers beta", std::abs(fit_exponent(l, m, 2) + 0.3) < 0.02);
  }
  {
    bool ok = true;
    for (int Nn = 0; Nn <= 6; ++Nn) {
      auto [a, b] = hermite_binomial_check<double>(Nn, 0.3, -1.1, 0.7, 0.2);
      ok = ok && std::abs(a - b) < 1e-10;
    }
    check("hermite binomial identity", ok);
  }
  {
    bool ok = true;
    for (int m = 0; m <= 10; m += 2) {
      std::size_t cnt = 0;
      for_each_pairing(iota_set(m), {PairingKind::P, 2}, [&](auto&) { ++cnt; });
      ok = ok && cnt == double_factorial_odd(m);
    }
    check("pairing counts (|J|-1)!!", ok);
  }
  {
    bool ok = true;
    for (auto& f : fixtures::all()) {
      auto r = f.full ? check_assumption_full(f.g) : check_assumption_weak(f.g);
      auto back = parse_diagram_string(write_diagram(f.g), f.g.name);
      ok = ok && write_diagram(back) == write_diagram(f.g);
      for (auto& v : r.items)
        if (!v.pass) ok = ok && replay_violation(f.g, r.kappa, v);
    }
    check("diagram fixtures round-trip and witnesses replay", ok);
  }
  {
    double v1 = counterterm_xi2_value({1, 0, 1}, 1.0 / 16), v2 = counterterm_xi2_value({1, 0, 1}, 1.0 / 32);
    check("c^{Xi^2} log increment ~ ln2/2pi", std::abs((v2 - v1) / (std::log(2.0) / (2 * M_PI)) - 1) < 0.03);
  }
  os << (failures ? "selftest FAILED\n" : "selftest passed\n");
  return failures ? 1 : 0;
}

}  // namespace spde::cli
