#pragma once

#include <boost/rational.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace spde {

using Rational = boost::rational<std::int64_t>;

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  std::size_t used = 0;
  try {
    if (slash == std::string::npos) {
      long long n = std::stoll(s, &used);
      if (used != s.size()) throw ParseError("bad rational '" + s + "'");
      return Rational(n);
    }
    std::string ns = s.substr(0, slash), ds = s.substr(slash + 1);
    long long n = std::stoll(ns, &used);
    if (used != ns.size()) throw ParseError("bad rational '" + s + "'");
    long long d = std::stoll(ds, &used);
    if (used != ds.size() || d == 0) throw ParseError("bad rational '" + s + "'");
    return Rational(n, d);
  } catch (const std::logic_error&) {
    throw ParseError("bad rational '" + s + "'");
  }
}

// small parameters kappa, kappa', kappa''
struct Kappas {
  Rational k{1, 100}, k1{1, 100}, k2{1, 100};
};

// a = c0 + ck*k + ck1*k' + ck2*k''
struct LinearLabel {
  Rational c0{0}, ck{0}, ck1{0}, ck2{0};

  LinearLabel() = default;
  LinearLabel(Rational c) : c0(c) {}
  LinearLabel(Rational c, Rational a, Rational b, Rational d) : c0(c), ck(a), ck1(b), ck2(d) {}

  Rational eval(const Kappas& kp) const { return c0 + ck * kp.k + ck1 * kp.k1 + ck2 * kp.k2; }
  bool is_constant() const { return ck == Rational(0) && ck1 == Rational(0) && ck2 == Rational(0); }

  // canonical text: terms joined by '+', symbols k, k1, k2
  std::string str() const {
    std::string out;
    auto term = [&](const Rational& c, const char* sym) {
      if (c == Rational(0)) return;
      std::string t;
      if (!*sym) t = to_string(c);
      else if (c == Rational(1)) t = sym;
      else t = to_string(c) + "*" + sym;
      if (!out.empty()) out += (t[0] == '-') ? "" : "+";
      out += t;
    };
    term(c0, "");
    term(ck, "k");
    term(ck1, "k1");
    term(ck2, "k2");
    return out.empty() ? "0" : out;
  }

  static LinearLabel parse(const std::string& text) {
    LinearLabel L;
    if (text.empty()) throw ParseError("empty label");
    std::vector<std::string> terms;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
      char ch = text[i];
      if ((ch == '+' || ch == '-') && i > 0 && text[i - 1] != '*' && text[i - 1] != '/') {
        terms.push_back(cur);
        cur.clear();
        if (ch == '-') cur = "-";
        continue;
      }
      cur += ch;
    }
    terms.push_back(cur);
    for (auto t : terms) {
      if (t.empty()) throw ParseError("bad label '" + text + "'");
      bool neg = false;
      if (t[0] == '-') {
        neg = true;
        t = t.substr(1);
      } else if (t[0] == '+') {
        t = t.substr(1);
      }
      Rational coeff(1);
      std::string sym;
      auto star = t.find('*');
      if (star != std::string::npos) {
        coeff = parse_rational(t.substr(0, star));
        sym = t.substr(star + 1);
      } else if (!t.empty() && t[0] == 'k') {
        sym = t;
      } else {
        coeff = parse_rational(t);
      }
      if (neg) coeff = -coeff;
      if (sym.empty()) L.c0 += coeff;
      else if (sym == "k") L.ck += coeff;
      else if (sym == "k1") L.ck1 += coeff;
      else if (sym == "k2") L.ck2 += coeff;
      else throw ParseError("unknown symbol '" + sym + "' in label '" + text + "'");
    }
    return L;
  }
};

enum class EdgeKind { test, kernel, rho, fictitious, F };

inline const char* kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::test: return "test";
    case EdgeKind::kernel: return "kernel";
    case EdgeKind::rho: return "rho";
    case EdgeKind::fictitious: return "fictitious";
    case EdgeKind::F: return "F";
  }
  return "?";
}

inline EdgeKind parse_edge_kind(const std::string& s) {
  for (auto k : {EdgeKind::test, EdgeKind::kernel, EdgeKind::rho, EdgeKind::fictitious, EdgeKind::F})
    if (s == kind_name(k)) return k;
  throw ParseError("unknown edge kind '" + s + "'");
}

struct DiagramEdge {
  int from = 0, to = 0;
  EdgeKind kind = EdgeKind::kernel;
  LinearLabel a;
  int r = 0;
  std::optional<Rational> I;
};

struct LabelledDiagram {
  std::string name;
  int s = 2;  // scaling dimension |s|
  std::vector<std::string> vertices;
  int star = 0;
  std::vector<int> tests;
  std::vector<DiagramEdge> edges;

  static constexpr int max_vertices = 24;

  int vertex(const std::string& v) const {
    auto it = std::find(vertices.begin(), vertices.end(), v);
    if (it == vertices.end()) throw UnknownVertex("unknown vertex '" + v + "'");
    return static_cast<int>(it - vertices.begin());
  }

  int add_vertex(const std::string& v) {
    auto it = std::find(vertices.begin(), vertices.end(), v);
    if (it != vertices.end()) return static_cast<int>(it - vertices.begin());
    vertices.push_back(v);
    return static_cast<int>(vertices.size()) - 1;
  }

  DiagramEdge& add_edge(const std::string& from, const std::string& to, EdgeKind k, LinearLabel a,
                        int r, std::optional<Rational> I = std::nullopt) {
    edges.push_back({add_vertex(from), add_vertex(to), k, a, r, I});
    return edges.back();
  }

  int nv() const { return static_cast<int>(vertices.size()); }

  std::uint32_t star_set() const {
    std::uint32_t m = 1u << star;
    for (int t : tests) m |= 1u << t;
    return m;
  }

  std::uint32_t all() const { return nv() >= 32 ? ~0u : ((1u << nv()) - 1u); }

  std::vector<std::string> names(std::uint32_t mask) const {
    std::vector<std::string> out;
    for (int v = 0; v < nv(); ++v)
      if (mask >> v & 1u) out.push_back(vertices[v]);
    return out;
  }

  // preamble invariants; throws MalformedDiagram
  void validate() const {
    if (s != 2 && s != 4) throw MalformedDiagram("|s| must be 2 or 4");
    if (nv() > max_vertices) throw TooLarge("diagram has " + std::to_string(nv()) + " vertices (max 24)");
    if (star < 0 || star >= nv()) throw MalformedDiagram("star vertex missing");
    if (tests.empty()) throw MalformedDiagram("need at least one test vertex");
    std::vector<int> seen;
    for (int t : tests) {
      if (t == star) throw MalformedDiagram("test vertex equals star");
      if (std::count(seen.begin(), seen.end(), t)) throw MalformedDiagram("test vertices must be distinct");
      seen.push_back(t);
      int n = 0;
      for (auto& e : edges)
        if (e.kind == EdgeKind::test && e.from == star && e.to == t) ++n;
      if (n != 1) throw MalformedDiagram("need exactly one test edge star -> " + vertices[t]);
    }
    int ntest = 0;
    for (auto& e : edges) {
      if (e.from < 0 || e.to < 0 || e.from >= nv() || e.to >= nv()) throw MalformedDiagram("edge endpoint out of range");
      if (e.from == e.to) throw MalformedDiagram("self loop at " + vertices[e.from]);
      if (e.r < -1 || e.r > 1) throw MalformedDiagram("r must be in {-1,0,1}");
      if ((e.from == star || e.to == star) && e.r != 0)
        throw MalformedDiagram("edge at star must have r = 0");
      if (e.kind == EdgeKind::test) {
        ++ntest;
        if (e.from != star) throw MalformedDiagram("test edges must leave the star");
        if (!e.a.is_constant() || e.a.c0 != Rational(0) || e.r != 0) throw MalformedDiagram("test edges carry (0,0)");
      }
      if (e.I && e.r != -1) throw MalformedDiagram("I only allowed on r = -1 edges");
      if (e.a.c0 < Rational(0) || e.a.ck < Rational(0) || e.a.ck1 < Rational(0) || e.a.ck2 < Rational(0))
        throw MalformedDiagram("labels must be nonnegative");
    }
    if (ntest != static_cast<int>(tests.size())) throw MalformedDiagram("test edge count does not match header");
    // parallel edges: at most one r != 0, and that one positive
    std::map<std::pair<int, int>, std::vector<int>> bundles;
    for (auto& e : edges) bundles[{std::min(e.from, e.to), std::max(e.from, e.to)}].push_back(e.r);
    for (auto& [key, rs] : bundles) {
      if (rs.size() < 2) continue;
      int nz = 0;
      for (int r : rs)
        if (r != 0) {
          ++nz;
          if (r < 0) throw MalformedDiagram("negative r on multi-edge " + vertices[key.first] + "-" + vertices[key.second]);
        }
      if (nz > 1) throw MalformedDiagram("two renormalised edges in bundle " + vertices[key.first] + "-" + vertices[key.second]);
    }
  }
};

struct EdgeSets {
  std::vector<int> up, down, internal, incident;
};

inline EdgeSets edge_sets(const LabelledDiagram& g, std::uint32_t mask) {
  if (g.nv() < 32 && (mask >> g.nv()) != 0) throw UnknownVertex("subset mask names a vertex outside the diagram");
  EdgeSets out;
  for (int i = 0; i < static_cast<int>(g.edges.size()); ++i) {
    const auto& e = g.edges[i];
    bool f = mask >> e.from & 1u, t = mask >> e.to & 1u;
    if (f && t) out.internal.push_back(i);
    if (f || t) out.incident.push_back(i);
    if (f && !t && e.r > 0) out.up.push_back(i);
    if (t && !f && e.r > 0) out.down.push_back(i);
  }
  return out;
}

inline EdgeSets edge_sets(const LabelledDiagram& g, const std::vector<std::string>& subset) {
  std::uint32_t m = 0;
  for (auto& v : subset) m |= 1u << g.vertex(v);
  return edge_sets(g, m);
}

struct ItemVerdict {
  int item = 0;
  bool pass = true;
  std::uint32_t witness = 0;  // vertex subset (item 1: the bundle's two endpoints)
  Rational lhs{0}, rhs{0};
  std::string relation;  // required relation lhs <rel> rhs
  std::size_t subsets_checked = 0;
};

struct CheckReport {
  std::string diagram;
  std::string assumption;  // "full" | "weak"
  Kappas kappa;
  std::vector<ItemVerdict> items;
  Rational alpha{0};
  Rational R{0};
  std::uint32_t R_witness = 0;
  bool pass() const {
    return std::all_of(items.begin(), items.end(), [](auto& v) { return v.pass; });
  }
};

namespace detail {

inline int popcount(std::uint32_t m) { return __builtin_popcount(m); }

inline std::vector<Rational> resolve(const LabelledDiagram& g, const Kappas& kp) {
  std::vector<Rational> a;
  a.reserve(g.edges.size());
  for (auto& e : g.edges) a.push_back(e.a.eval(kp));
  return a;
}

struct Bundle {
  int u, v;
  Rational a_sum{0};
  Rational r_neg{0};  // sum of r wedge 0
};

inline std::vector<Bundle> bundles(const LabelledDiagram& g, const std::vector<Rational>& a) {
  std::map<std::pair<int, int>, Bundle> m;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    auto& e = g.edges[i];
    std::pair<int, int> key{std::min(e.from, e.to), std::max(e.from, e.to)};
    auto it = m.find(key);
    if (it == m.end()) it = m.emplace(key, Bundle{key.first, key.second}).first;
    it->second.a_sum += a[i];
    it->second.r_neg += Rational(std::min(e.r, 0));
  }
  std::vector<Bundle> out;
  for (auto& [k, b] : m) out.push_back(b);
  return out;
}

// lhs and rhs of items 2-4 for one subset
inline Rational item2_lhs(const LabelledDiagram& g, const std::vector<Rational>& a, std::uint32_t m) {
  Rational s{0};
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if ((m >> g.edges[i].from & 1u) && (m >> g.edges[i].to & 1u)) s += a[i];
  return s;
}

inline Rational item3_lhs(const LabelledDiagram& g, const std::vector<Rational>& a, std::uint32_t m) {
  Rational s{0};
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    auto& e = g.edges[i];
    bool f = m >> e.from & 1u, t = m >> e.to & 1u;
    if (f && t) s += a[i];
    else if (f && e.r > 0) s += a[i] + Rational(e.r - 1);
    else if (t && e.r > 0) s -= Rational(e.r);
  }
  return s;
}

inline Rational item4_lhs(const LabelledDiagram& g, const std::vector<Rational>& a, std::uint32_t m) {
  Rational s{0};
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    auto& e = g.edges[i];
    bool f = m >> e.from & 1u, t = m >> e.to & 1u;
    if (!f && !t) continue;
    bool down = t && !f && e.r > 0;
    bool up = f && !t && e.r > 0;
    if (!down) s += a[i];
    if (up) s += Rational(e.r);
    if (down) s -= Rational(e.r - 1);
  }
  return s;
}

inline Rational incident_sum(const LabelledDiagram& g, const std::vector<Rational>& a, std::uint32_t m) {
  Rational s{0};
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if ((m >> g.edges[i].from & 1u) || (m >> g.edges[i].to & 1u)) s += a[i];
  return s;
}

inline void guard_size(const LabelledDiagram& g) {
  if (g.nv() > LabelledDiagram::max_vertices)
    throw TooLarge("diagram has " + std::to_string(g.nv()) + " vertices (max 24)");
}

// item 1, edges of a bundle add up
inline ItemVerdict check_item1(const LabelledDiagram& g, const std::vector<Rational>& a) {
  ItemVerdict v;
  v.item = 1;
  v.relation = "<";
  v.rhs = Rational(g.s);
  for (auto& b : bundles(g, a)) {
    ++v.subsets_checked;
    Rational lhs = b.a_sum + b.r_neg;
    if (!(lhs < v.rhs)) {
      v.pass = false;
      v.witness = (1u << b.u) | (1u << b.v);
      v.lhs = lhs;
      return v;
    }
  }
  return v;
}

template <class Admit, class Lhs, class Rhs, class Holds>
ItemVerdict sweep(int item, const char* rel, const LabelledDiagram& g, Admit admit, Lhs lhs, Rhs rhs, Holds holds) {
  ItemVerdict v;
  v.item = item;
  v.relation = rel;
  const std::uint32_t n = 1u << g.nv();
  for (std::uint32_t m = 0; m < n; ++m) {
    if (!admit(m)) continue;
    ++v.subsets_checked;
    Rational L = lhs(m), Rr = rhs(m);
    if (!holds(L, Rr)) {
      v.pass = false;
      v.witness = m;
      v.lhs = L;
      v.rhs = Rr;
      return v;
    }
  }
  return v;
}

inline ItemVerdict check_item2(const LabelledDiagram& g, const std::vector<Rational>& a) {
  const std::uint32_t star = 1u << g.star;
  return sweep(
      2, "<", g, [&](std::uint32_t m) { return !(m & star) && popcount(m) >= 3; },
      [&](std::uint32_t m) { return item2_lhs(g, a, m); },
      [&](std::uint32_t m) { return Rational((popcount(m) - 1) * g.s); },
      [](const Rational& l, const Rational& r) { return l < r; });
}

inline ItemVerdict check_item3(const LabelledDiagram& g, const std::vector<Rational>& a) {
  const std::uint32_t star = 1u << g.star;
  return sweep(
      3, "<", g, [&](std::uint32_t m) { return (m & star) && popcount(m) >= 2; },
      [&](std::uint32_t m) { return item3_lhs(g, a, m); },
      [&](std::uint32_t m) { return Rational((popcount(m) - 1) * g.s); },
      [](const Rational& l, const Rational& r) { return l < r; });
}

inline ItemVerdict check_item4(const LabelledDiagram& g, const std::vector<Rational>& a) {
  const std::uint32_t vs = g.star_set();
  return sweep(
      4, ">", g, [&](std::uint32_t m) { return m != 0 && !(m & vs); },
      [&](std::uint32_t m) { return item4_lhs(g, a, m); },
      [&](std::uint32_t m) { return Rational(popcount(m) * g.s); },
      [](const Rational& l, const Rational& r) { return l > r; });
}

}  // namespace detail

inline Rational compute_alpha_full(const LabelledDiagram& g, const Kappas& kp = {}) {
  Rational sum{0};
  for (auto& e : g.edges) sum += e.a.eval(kp);
  int outside = g.nv() - detail::popcount(g.star_set());
  return Rational(g.s * outside) - sum;
}

struct RResult {
  Rational value{0};
  std::uint32_t witness = 0;
};

inline RResult compute_R(const LabelledDiagram& g, const Kappas& kp = {}) {
  detail::guard_size(g);
  auto a = detail::resolve(g, kp);
  const std::uint32_t vs = g.star_set(), n = 1u << g.nv();
  RResult best;  // empty set gives 0
  for (std::uint32_t m = 1; m < n; ++m) {
    if (m & vs) continue;
    Rational val = Rational(detail::popcount(m) * g.s) - detail::incident_sum(g, a, m);
    if (val > best.value) best = {val, m};
  }
  return best;
}

inline Rational compute_alpha_weak(const LabelledDiagram& g, const Kappas& kp = {}) {
  return compute_alpha_full(g, kp) - compute_R(g, kp).value;
}

inline CheckReport check_assumption_full(const LabelledDiagram& g, const Kappas& kp = {}) {
  detail::guard_size(g);
  g.validate();
  auto a = detail::resolve(g, kp);
  CheckReport rep{g.name, "full", kp, {}};
  rep.items.push_back(detail::check_item1(g, a));
  rep.items.push_back(detail::check_item2(g, a));
  rep.items.push_back(detail::check_item3(g, a));
  rep.items.push_back(detail::check_item4(g, a));
  rep.alpha = compute_alpha_full(g, kp);
  auto R = compute_R(g, kp);
  rep.R = R.value;
  rep.R_witness = R.witness;
  return rep;
}

inline CheckReport check_assumption_weak(const LabelledDiagram& g, const Kappas& kp = {}) {
  detail::guard_size(g);
  g.validate();
  auto a = detail::resolve(g, kp);
  CheckReport rep{g.name, "weak", kp, {}};
  rep.items.push_back(detail::check_item1(g, a));
  rep.items.push_back(detail::check_item2(g, a));
  auto R = compute_R(g, kp);
  rep.R = R.value;
  rep.R_witness = R.witness;
  rep.alpha = compute_alpha_full(g, kp) - R.value;
  return rep;
}

// recompute a single item on a stored subset; true if the inequality is violated there
inline bool replay_violation(const LabelledDiagram& g, const Kappas& kp, const ItemVerdict& v) {
  auto a = detail::resolve(g, kp);
  const std::uint32_t m = v.witness;
  const int k = detail::popcount(m);
  switch (v.item) {
    case 1: {
      Rational lhs{0};
      for (std::size_t i = 0; i < g.edges.size(); ++i) {
        auto& e = g.edges[i];
        std::uint32_t em = (1u << e.from) | (1u << e.to);
        if (em == m) lhs += a[i] + Rational(std::min(e.r, 0));
      }
      return k == 2 && lhs == v.lhs && !(lhs < Rational(g.s));
    }
    case 2: {
      if ((m >> g.star & 1u) || k < 3) return false;
      Rational lhs = detail::item2_lhs(g, a, m);
      return lhs == v.lhs && !(lhs < Rational((k - 1) * g.s));
    }
    case 3: {
      if (!(m >> g.star & 1u) || k < 2) return false;
      Rational lhs = detail::item3_lhs(g, a, m);
      return lhs == v.lhs && !(lhs < Rational((k - 1) * g.s));
    }
    case 4: {
      if (m == 0 || (m & g.star_set())) return false;
      Rational lhs = detail::item4_lhs(g, a, m);
      return lhs == v.lhs && !(lhs > Rational(k * g.s));
    }
  }
  return false;
}

// ---- text format ----

inline std::string write_diagram(const LabelledDiagram& g) {
  std::ostringstream os;
  if (!g.name.empty()) os << "# " << g.name << "\n";
  os << "graph |s|=" << g.s << " star=" << g.vertices[g.star] << " tests=";
  for (std::size_t i = 0; i < g.tests.size(); ++i) os << (i ? "," : "") << g.vertices[g.tests[i]];
  os << "\n";
  os << "vertices";
  for (auto& v : g.vertices) os << " " << v;
  os << "\n";
  for (auto& e : g.edges) {
    os << g.vertices[e.from] << " " << g.vertices[e.to] << " " << kind_name(e.kind) << " " << e.a.str() << " "
       << e.r;
    if (e.I) os << " " << to_string(*e.I);
    os << "\n";
  }
  return os.str();
}

inline LabelledDiagram parse_diagram(std::istream& in, const std::string& name = "") {
  LabelledDiagram g;
  g.name = name;
  std::string line, star_name;
  std::vector<std::string> test_names;
  bool header = false;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) {
      if (g.name.empty() && !header && lineno == 1) {
        auto t = line.substr(h + 1);
        t.erase(0, t.find_first_not_of(' '));
        g.name = t;
      }
      line = line.substr(0, h);
    }
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "graph") {
      if (header) throw fail("duplicate graph header");
      header = true;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string::npos) throw fail("expected key=value, got '" + tok[i] + "'");
        auto key = tok[i].substr(0, eq), val = tok[i].substr(eq + 1);
        if (key == "|s|") {
          if (val != "2" && val != "4") throw fail("|s| must be 2 or 4");
          g.s = std::stoi(val);
        } else if (key == "star") {
          star_name = val;
        } else if (key == "tests") {
          std::istringstream vs(val);
          for (std::string v; std::getline(vs, v, ',');)
            if (!v.empty()) test_names.push_back(v);
        } else {
          throw fail("unknown header key '" + key + "'");
        }
      }
      if (star_name.empty() || test_names.empty()) throw fail("header needs star= and tests=");
      g.star = g.add_vertex(star_name);
      for (auto& t : test_names) g.tests.push_back(g.add_vertex(t));
      continue;
    }
    if (!header) throw fail("edge before graph header");
    if (tok[0] == "vertices") {
      for (std::size_t i = 1; i < tok.size(); ++i) g.add_vertex(tok[i]);
      continue;
    }
    if (tok.size() != 5 && tok.size() != 6) throw fail("expected 'from to kind a r [I]'");
    DiagramEdge e;
    try {
      e.kind = parse_edge_kind(tok[2]);
      e.a = LinearLabel::parse(tok[3]);
      if (tok[4] != "-1" && tok[4] != "0" && tok[4] != "1") throw ParseError("r must be -1, 0 or 1");
      e.r = std::stoi(tok[4]);
      if (tok.size() == 6) e.I = parse_rational(tok[5]);
    } catch (const ParseError& ex) {
      throw fail(ex.what());
    }
    e.from = g.add_vertex(tok[0]);
    e.to = g.add_vertex(tok[1]);
    g.edges.push_back(e);
  }
  if (!header) throw ParseError("missing graph header");
  try {
    g.validate();
  } catch (const MalformedDiagram& ex) {
    throw ParseError(std::string("malformed diagram: ") + ex.what());
  }
  return g;
}

inline LabelledDiagram parse_diagram_string(const std::string& text, const std::string& name = "") {
  std::istringstream is(text);
  return parse_diagram(is, name);
}

inline LabelledDiagram load_diagram(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  return parse_diagram(f);
}

inline nlohmann::ordered_json to_json(const CheckReport& r, const LabelledDiagram& g) {
  nlohmann::ordered_json j;
  j["diagram"] = r.diagram;
  j["assumption"] = r.assumption;
  j["kappa"] = {{"k", to_string(r.kappa.k)}, {"k1", to_string(r.kappa.k1)}, {"k2", to_string(r.kappa.k2)}};
  j["pass"] = r.pass();
  auto items = nlohmann::ordered_json::array();
  for (auto& v : r.items) {
    nlohmann::ordered_json it;
    it["item"] = v.item;
    it["pass"] = v.pass;
    it["subsets_checked"] = v.subsets_checked;
    if (!v.pass) {
      it["witness"] = g.names(v.witness);
      it["lhs"] = to_string(v.lhs);
      it["relation"] = v.relation;
      it["rhs"] = to_string(v.rhs);
    }
    items.push_back(it);
  }
  j["items"] = items;
  j["alpha"] = to_string(r.alpha);
  j["R"] = to_string(r.R);
  j["R_witness"] = g.names(r.R_witness);
  return j;
}

}  // namespace spde
