#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "spde/hq_fixtures.hpp"
#include "spde/hq_graphs.hpp"

using namespace spde;

namespace {
std::string slurp(const std::string& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}
const LabelledDiagram& find(const std::vector<fixtures::Fixture>& all, const std::string& name) {
  for (auto& f : all)
    if (f.g.name == name) return f.g;
  throw std::runtime_error("no fixture " + name);
}
}  // namespace

TEST_CASE("diagram files match the built-in fixtures") {
  for (auto& f : fixtures::all()) {
    const std::string path = std::string(SPDE_DATA_DIR) + "/diagrams/" + f.g.name + ".txt";
    CHECK(write_diagram(f.g) == slurp(path));
    auto g = load_diagram(path);
    CHECK(write_diagram(g) == write_diagram(f.g));
  }
}

TEST_CASE("edge sets") {
  auto all = fixtures::all();
  auto& g = find(all, "dumbbell_q2_1");
  auto es = edge_sets(g, std::vector<std::string>{"v2", "v4"});
  CHECK(es.internal == std::vector<int>{4});
  CHECK(es.incident == std::vector<int>{2, 3, 4});
  CHECK(es.up == std::vector<int>{2, 3});
  CHECK(es.down.empty());
  CHECK_THROWS_AS(edge_sets(g, std::vector<std::string>{"nope"}), UnknownVertex);
}

TEST_CASE("exponent anchors") {
  auto all = fixtures::all();
  CHECK(compute_alpha_full(find(all, "dumbbell_q2_1")) == Rational(-1, 25));
  auto& phi = find(all, "phi4_n3_q4");
  CHECK(compute_R(phi).value == Rational(8));
  CHECK(compute_alpha_weak(phi) == Rational(-1, 25));
  CHECK(compute_alpha_weak(find(all, "cherry_q2_2")) == Rational(-3, 100));
  Kappas kp;
  for (auto [name, q] : {std::pair{"cherry_q2_1", 2}, std::pair{"cherry_q4_1", 4}}) {
    auto& g = find(all, name);
    REQUIRE(fixtures::lone_vertices(g) == 0);
    CHECK(compute_alpha_weak(g) == -Rational(q) * (Rational(2) * kp.k1 + kp.k));
  }
}

TEST_CASE("fixture verdicts") {
  for (auto& f : fixtures::all()) {
    auto rep = f.full ? check_assumption_full(f.g) : check_assumption_weak(f.g);
    bool expect_fail = f.g.name == "dumbbell_q2_4" || f.g.name == "dumbbell_q5_b";
    INFO(f.g.name);
    CHECK(rep.pass() == !expect_fail);
    for (auto& v : rep.items)
      if (!v.pass) CHECK(replay_violation(f.g, rep.kappa, v));
  }
}

TEST_CASE("violations carry replayable witnesses") {
  auto all = fixtures::all();
  Kappas big;
  big.k1 = Rational(1);
  auto& g = find(all, "dumbbell_q2_1");
  auto rep = check_assumption_full(g, big);
  CHECK_FALSE(rep.pass());
  for (auto& v : rep.items)
    if (!v.pass) CHECK(replay_violation(g, big, v));

  auto heavy = fixtures::tree("heavy_rho", 2, 2, 2, fixtures::kappa_term(1, 1), LinearLabel(Rational(4)),
                              {{"ab", "ba"}});
  auto w = check_assumption_weak(heavy);
  REQUIRE(w.items.size() == 2);
  CHECK_FALSE(w.items[1].pass);
  CHECK(replay_violation(heavy, Kappas{}, w.items[1]));
  auto j = to_json(w, heavy);
  CHECK(j["pass"] == false);
  CHECK(j["items"][1].contains("witness"));
}

TEST_CASE("parse errors name the line") {
  const std::string ok = "graph |s|=2 star=s tests=t\ns t test 0 0\nu t kernel 1+k1 1\n";
  CHECK_NOTHROW(parse_diagram_string(ok));
  auto msg = [](const std::string& text) {
    try {
      parse_diagram_string(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg("graph |s|=2 star=s tests=t\ns t test 0 0\nu t kernel 1+q 1\n").find("line 3") != std::string::npos);
  CHECK(msg("graph |s|=3 star=s tests=t\n").find("line 1") != std::string::npos);
  CHECK(msg("s t test 0 0\n").find("line 1") != std::string::npos);
  CHECK(msg("graph |s|=2 star=s tests=t\ns t test 0 0\nu t kernel 1 2\n").find("line 3") != std::string::npos);
  CHECK_FALSE(msg("graph |s|=2 star=s tests=t\nu t kernel 1 1\n").empty());
}
