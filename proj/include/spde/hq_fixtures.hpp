#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hq_graphs.hpp"

namespace spde::fixtures {

using Pairs = std::vector<std::pair<std::string, std::string>>;

inline LinearLabel kappa_term(Rational c0, int which) {
  LinearLabel L(c0);
  if (which == 0) L.ck = 1;
  if (which == 1) L.ck1 = 1;
  if (which == 2) L.ck2 = 1;
  return L;
}

// tests star->bottom, K top->bottom (k',1), rho (2+k,-1), fictitious (1+k'',0),
// F star->v for every vertex without a rho edge
inline LabelledDiagram dumbbell(const std::string& name, const std::vector<std::string>& bottoms,
                                const std::vector<std::string>& tops, const Pairs& rho, const Pairs& fict) {
  LabelledDiagram g;
  g.name = name;
  g.s = 2;
  g.star = g.add_vertex("star");
  for (auto& b : bottoms) g.tests.push_back(g.add_vertex(b));
  for (auto& t : tops) g.add_vertex(t);
  for (auto& b : bottoms) g.add_edge("star", b, EdgeKind::test, Rational(0), 0);
  for (std::size_t i = 0; i < tops.size(); ++i) g.add_edge(tops[i], bottoms[i], EdgeKind::kernel, kappa_term(0, 1), 1);
  for (auto& [u, v] : rho) g.add_edge(u, v, EdgeKind::rho, kappa_term(2, 0), -1, Rational(1));
  for (auto& [u, v] : fict) g.add_edge(u, v, EdgeKind::fictitious, kappa_term(1, 2), 0);
  for (auto& [u, v] : fict) {
    g.add_edge("star", u, EdgeKind::F, Rational(0), 0);
    g.add_edge("star", v, EdgeKind::F, Rational(0), 0);
  }
  return g;
}

inline std::vector<LabelledDiagram> dumbbell_q2() {
  const std::vector<std::string> B{"v1", "v3"}, T{"v2", "v4"};
  return {
      dumbbell("dumbbell_q2_1", B, T, {{"v4", "v2"}, {"v3", "v1"}}, {}),
      dumbbell("dumbbell_q2_2", B, T, {{"v4", "v1"}, {"v3", "v2"}}, {}),
      dumbbell("dumbbell_q2_3", B, T, {{"v4", "v2"}}, {{"v3", "v1"}}),
      dumbbell("dumbbell_q2_4", B, T, {{"v3", "v1"}}, {{"v4", "v2"}}),
      dumbbell("dumbbell_q2_5", B, T, {{"v4", "v1"}}, {{"v3", "v2"}}),
      dumbbell("dumbbell_q2_6", B, T, {}, {{"v2", "v1"}, {"v4", "v3"}}),
  };
}

inline std::vector<LabelledDiagram> dumbbell_q5() {
  const std::vector<std::string> B{"lld", "ld", "md", "rd", "rrd"}, T{"llu", "lu", "mu", "ru", "rru"};
  return {
      dumbbell("dumbbell_q5_a", B, T, {{"ru", "mu"}, {"rrd", "rd"}, {"ld", "md"}, {"lld", "lu"}, {"rru", "llu"}}, {}),
      dumbbell("dumbbell_q5_b", B, T, {{"rd", "md"}, {"rrd", "ru"}, {"ld", "mu"}, {"lld", "lu"}}, {{"rru", "llu"}}),
      dumbbell("dumbbell_q5_c", B, T, {{"ru", "mu"}, {"rd", "md"}, {"llu", "ld"}, {"rru", "lu"}}, {{"lld", "rrd"}}),
  };
}

// tests star->v_i, N kernel edges w->v_i, rho between leaves, F v->w for unpaired leaves
inline LabelledDiagram tree(const std::string& name, int s, int q, int N, LinearLabel kernel, LinearLabel rho_label,
                            const Pairs& rho) {
  LabelledDiagram g;
  g.name = name;
  g.s = s;
  g.star = g.add_vertex("star");
  std::vector<std::string> roots;
  for (int j = 0; j < q; ++j) {
    roots.push_back(std::string(1, static_cast<char>('a' + j)));
    g.tests.push_back(g.add_vertex(roots.back()));
  }
  std::vector<std::string> leaves;
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < N; ++i) leaves.push_back(roots[j] + static_cast<char>('a' + i));
  for (auto& l : leaves) g.add_vertex(l);
  for (auto& r : roots) g.add_edge("star", r, EdgeKind::test, Rational(0), 0);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < N; ++i) g.add_edge(leaves[j * N + i], roots[j], EdgeKind::kernel, kernel, 0);
  std::vector<std::string> paired;
  for (auto& [u, v] : rho) {
    g.vertex(u);
    g.vertex(v);
    g.add_edge(u, v, EdgeKind::rho, rho_label, -1, Rational(1));
    paired.push_back(u);
    paired.push_back(v);
  }
  for (auto& l : leaves)
    if (std::find(paired.begin(), paired.end(), l) == paired.end())
      g.add_edge(l.substr(0, 1), l, EdgeKind::F, Rational(0), 0);
  return g;
}

inline LabelledDiagram cherry(const std::string& name, int q, const Pairs& rho) {
  return tree(name, 2, q, 2, kappa_term(1, 1), kappa_term(2, 0), rho);
}

inline std::vector<LabelledDiagram> cherry_q2() {
  return {
      cherry("cherry_q2_1", 2, {{"aa", "bb"}, {"ab", "ba"}}),
      cherry("cherry_q2_2", 2, {{"ab", "ba"}}),
  };
}

inline std::vector<LabelledDiagram> cherry_q4() {
  return {
      cherry("cherry_q4_1", 4, {{"aa", "db"}, {"ab", "ba"}, {"bb", "ca"}, {"cb", "da"}}),
      cherry("cherry_q4_2", 4, {{"aa", "db"}, {"ab", "ba"}, {"bb", "da"}}),
      cherry("cherry_q4_3", 4, {{"aa", "db"}, {"bb", "ca"}}),
  };
}

inline LabelledDiagram phi4_n3_q4() {
  return tree("phi4_n3_q4", 4, 4, 3, Rational(2), kappa_term(4, 0),
              {{"aa", "db"}, {"ac", "ba"}, {"bb", "da"}, {"bc", "cb"}});
}

struct Fixture {
  LabelledDiagram g;
  bool full;  // designated assumption: full criterion or weak variant
};

inline std::vector<Fixture> all() {
  std::vector<Fixture> out;
  for (auto& g : dumbbell_q2()) out.push_back({g, true});
  for (auto& g : dumbbell_q5()) out.push_back({g, true});
  for (auto& g : cherry_q2()) out.push_back({g, false});
  for (auto& g : cherry_q4()) out.push_back({g, false});
  out.push_back({phi4_n3_q4(), false});
  return out;
}

// number of leaves with no rho edge
inline int lone_vertices(const LabelledDiagram& g) {
  int m = 0;
  for (int v = 0; v < g.nv(); ++v) {
    if (g.star_set() >> v & 1u) continue;
    bool rho = false;
    for (auto& e : g.edges)
      if (e.kind == EdgeKind::rho && (e.from == v || e.to == v)) rho = true;
    if (!rho) ++m;
  }
  return m;
}

}  // namespace spde::fixtures
