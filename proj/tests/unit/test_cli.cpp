#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spde/cli.hpp"

using namespace spde;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct CaptureCout {
  std::ostringstream buf;
  std::streambuf* old;
  CaptureCout() : old(std::cout.rdbuf(buf.rdbuf())) {}
  ~CaptureCout() { std::cout.rdbuf(old); }
};

std::string config_error(const std::string& text) {
  try {
    Config::parse_string(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("config parsing") {
  auto c = Config::parse_string("# top\n[run]\nseed = 7\n\n[grid]\nn = 64  # trailing\n[x]\nl = 1, 0.5,0.25\n");
  CHECK(c.u64("run.seed", 0) == 7);
  CHECK(c.integer("grid.n") == 64);
  CHECK(c.list("x.l") == std::vector<double>{1, 0.5, 0.25});
  CHECK(config_error("[run\nseed = 1\n").find(":1:") != std::string::npos);
  CHECK(config_error("[run]\nseed\n").find(":2:") != std::string::npos);
  CHECK(config_error("[a]\nk = 1\nk = 2\n").find("duplicate") != std::string::npos);
  CHECK_THROWS_AS(Config::parse_string("[g]\nn = 1.5\n").integer("g.n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[g]\nn = 1,,2\n").list("g.n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[g]\nn = abc\n").num("g.n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[g]\nzzz = 1\n").reject_unknown(cli::kCommonKeys), ConfigError);
}

TEST_CASE("counterterms command") {
  fs::path out = fs::temp_directory_path() / "spde_cli_ct";
  fs::remove_all(out);
  cli::RunOptions o;
  o.out = out.string();
  auto c = Config::parse_string("[counterterms]\nkinds = pam_xi2\ndeltas = 0.125, 0.0625, 0.03125, 0.015625\n");
  REQUIRE(cli::cmd_counterterms(c, o) == 0);
  auto j = nlohmann::json::parse(slurp(out / "counterterms_summary.json"));
  double slope = j["kinds"]["pam_xi2"]["slope"];
  CHECK(slope == Approx(1 / (2 * M_PI)).epsilon(0.03));
  auto first = slurp(out / "counterterms_pam_xi2.csv");
  CHECK(first.rfind("# command=counterterms", 0) == 0);
  REQUIRE(cli::cmd_counterterms(c, o) == 0);
  CHECK(slurp(out / "counterterms_pam_xi2.csv") == first);

  try {
    cli::cmd_counterterms(Config::parse_string("[counterterms]\nkinds = pam_xi2\n"), o);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("counterterms.deltas") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::cmd_counterterms(Config::parse_string("[counterterms]\ndeltas = 0.1\na12 = 2\n"), o),
                  EllipticityViolation);
  fs::remove_all(out);
}

TEST_CASE("simulate command is reproducible and validates K") {
  fs::path out = fs::temp_directory_path() / "spde_cli_sim";
  fs::remove_all(out);
  cli::RunOptions o;
  o.out = out.string();
  const std::string base = "[grid]\nn = 32\n[simulate]\nequation = pam\ndeltas = 0.25, 0.125\nT = 0.0625\ndt = 0.00390625\n";
  auto c = Config::parse_string(base);
  REQUIRE(cli::cmd_simulate(c, o) == 0);
  auto a = slurp(out / "convergence.csv"), b = slurp(out / "simulate.json"), k = slurp(out / "u_delta1.ckpt");
  REQUIRE(cli::cmd_simulate(c, o) == 0);
  CHECK(slurp(out / "convergence.csv") == a);
  CHECK(slurp(out / "simulate.json") == b);
  CHECK(slurp(out / "u_delta1.ckpt") == k);
  auto [f, t] = read_checkpoint((out / "u_delta1.ckpt").string());
  CHECK(f.grid.n == 32);
  CHECK(t == 0.0625);

  CHECK_THROWS_AS(cli::cmd_simulate(Config::parse_string(base + "K = 3\n"), o), ConfigError);
  CHECK_THROWS_AS(
      cli::cmd_simulate(Config::parse_string("[simulate]\nequation = phi\ndeltas = 0.25, 0.125\nK = 0\n"), o),
      ConfigError);
  CHECK_THROWS_AS(cli::cmd_simulate(Config::parse_string("[simulate]\nequation = heat\ndeltas = 0.25\n"), o),
                  ConfigError);
  CHECK_THROWS_AS(cli::cmd_simulate(Config::parse_string(base + "bogus = 1\n"), o), ConfigError);
  fs::remove_all(out);
}

TEST_CASE("pairings command") {
  {
    CaptureCout cap;
    CHECK(cli::cmd_pairings(6, "P", 2, false) == 0);
    CHECK(cap.buf.str() == "count 15\n");
  }
  {
    CaptureCout cap;
    CHECK(cli::cmd_pairings(5, "P", 2, false) == 0);
    CHECK(cap.buf.str() == "count 0\n");
  }
  {
    CaptureCout cap;
    CHECK(cli::cmd_pairings(4, "P", 2, true) == 0);
    CHECK(cap.buf.str().find("count 3") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::cmd_pairings(18, "P", 2, false), TooLarge);
  CHECK_THROWS(cli::cmd_pairings(4, "Q", 2, false));
}

TEST_CASE("check-graph command") {
  fs::path out = fs::temp_directory_path() / "spde_cli_graph";
  fs::remove_all(out);
  cli::RunOptions o;
  o.out = out.string();
  const std::string path = std::string(SPDE_DATA_DIR) + "/diagrams/dumbbell_q2_4.txt";
  {
    CaptureCout cap;
    CHECK(cli::cmd_check_graph(path, "", "full", o, true) == 0);
    CHECK(cap.buf.str().find("item") != std::string::npos);
  }
  auto j = nlohmann::json::parse(slurp(out / "dumbbell_q2_4_report.json"));
  CHECK(j["pass"] == false);
  CHECK_THROWS_AS(cli::cmd_check_graph(path, "", "strong", o, true), ConfigError);
  CHECK(cli::parse_kappas("1/10,1/20,1/30").k1 == Rational(1, 20));
  fs::remove_all(out);
}

TEST_CASE("selftest passes") {
  std::ostringstream os;
  CHECK(cli::cmd_selftest(os) == 0);
  CHECK(os.str().find("FAIL") == std::string::npos);
}
