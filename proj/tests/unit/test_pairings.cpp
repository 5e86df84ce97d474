#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "brute_pairings.hpp"
#include "spde/pairings.hpp"

using namespace spde;
using Catch::Approx;

using brute::admissible;

TEST_CASE("pairing counts") {
  CHECK(enumerate_pairings(iota_set(4), {PairingKind::P, 2}).size() == 3);
  CHECK(enumerate_pairings(iota_set(2), {PairingKind::P2, 2}).empty());
  CHECK(enumerate_pairings(iota_set(4), {PairingKind::PN, 2}).size() == 2);
  CHECK(enumerate_pairings(iota_set(5), {PairingKind::P, 2}).empty());
  CHECK(enumerate_pairings({}, {PairingKind::P, 2}).size() == 1);
  for (int m = 0; m <= 10; m += 2)
    CHECK(enumerate_pairings(iota_set(m), {PairingKind::P, 2}).size() == double_factorial_odd(m));
  CHECK_THROWS_AS(parse_pairing_kind("Q"), ConfigError);
}

TEST_CASE("pairing classes match brute force for |J| <= 10") {
  for (int m = 0; m <= 10; m += 2) {
    auto all = brute::matchings(iota_set(m));
    for (std::string cls : {"P", "P2", "PN", "PN-block"})
      for (int N : {2, 3}) {
        std::size_t expect = 0;
        for (auto& x : all) expect += admissible(x, cls, N);
        auto got = enumerate_pairings(iota_set(m), {parse_pairing_kind(cls), N});
        CHECK(got.size() == expect);
        for (auto& p : got) CHECK(admissible(p.blocks, cls, N));
      }
  }
  // non-contiguous base set
  std::vector<int> J{1, 2, 5, 6};
  CHECK(enumerate_pairings(J, {PairingKind::P2, 2}).size() == 2);
}

TEST_CASE("Isserlis moments") {
  Eigen::MatrixXd one(1, 1);
  one << 1;
  CHECK(isserlis_moment(one, {0, 0, 0, 0}) == 3);
  auto C = random_covariance(4, 3);
  CHECK(isserlis_moment(C, {0, 1, 2}) == 0);
  double exact = C(0, 1) * C(2, 3) + C(0, 2) * C(1, 3) + C(0, 3) * C(1, 2);
  CHECK(isserlis_moment(C, {0, 1, 2, 3}) == Approx(exact).epsilon(1e-14));
  auto L = psd_sqrt(C);
  NormalSource ns(5);
  double s = 0, s2 = 0;
  const int R = 1000000;
  Eigen::VectorXd g(4), x(4);
  for (int r = 0; r < R; ++r) {
    for (int i = 0; i < 4; ++i) g[i] = ns();
    x = L * g;
    double v = x[0] * x[1] * x[2] * x[3];
    s += v, s2 += v * v;
  }
  double m = s / R, se = std::sqrt((s2 / R - m * m) / (R - 1));
  CHECK(std::abs(m - exact) < 4 * se);
  CHECK_THROWS_AS(isserlis_moment(C, {0, 7}), DimensionMismatch);
}

TEST_CASE("integration by parts expansions") {
  SECTION("F = 1, plain, m = 2") {
    IbpSetup s;
    s.n = 1;
    s.m = 2;
    auto C = random_covariance(3, 1);
    CHECK(gaussian_ibp_expand(PolynomialFunctional::constant(1, 1), C, s) == Approx(C(1, 2)).epsilon(1e-14));
  }
  SECTION("F = X1, wick pairs, m = 1") {
    IbpSetup s;
    s.n = 1;
    s.m = 1;
    s.variant = IbpVariant::wick_pairs;
    auto C = random_covariance(3, 2);
    auto F = PolynomialFunctional::monomial(1, {1});
    CHECK(gaussian_ibp_expand(F, C, s) == 0.0);
    auto F4 = PolynomialFunctional::monomial(1, {4});
    double rhs = gaussian_ibp_expand(F4, C, s);
    CHECK(rhs == Approx(12 * C(0, 1) * C(0, 2) * C(0, 0)).epsilon(1e-12));
    auto e = ibp_lhs_mc({F4}, C, s, 1000000, 4);
    CHECK(std::abs(e[0].mean - rhs) < 4 * e[0].se);
  }
  SECTION("F = X1^2, wick blocks N = 2, m = 1") {
    IbpSetup s;
    s.n = 1;
    s.m = 1;
    s.N = 2;
    s.variant = IbpVariant::wick_blocks;
    auto C = random_covariance(3, 3);
    auto F = PolynomialFunctional::monomial(1, {2});
    double rhs = gaussian_ibp_expand(F, C, s);
    CHECK(rhs == Approx(2 * C(0, 1) * C(0, 2)).epsilon(1e-12));
    auto e = ibp_lhs_mc({F}, C, s, 1000000, 5);
    CHECK(std::abs(e[0].mean - rhs) < 4 * e[0].se);
  }
  SECTION("dimension checks") {
    IbpSetup s;
    s.n = 2;
    s.m = 1;
    CHECK_THROWS_AS(gaussian_ibp_expand(PolynomialFunctional::constant(2, 1), random_covariance(2, 1), s),
                    DimensionMismatch);
  }
}
