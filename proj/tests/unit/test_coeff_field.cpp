#include <catch_amalgamated.hpp>

#include <cmath>

#include "spde/coeff_field.hpp"
#include "spde/noise.hpp"

using namespace spde;
using Catch::Approx;

TEST_CASE("degenerate and constant maps") {
  Grid2D g(16);
  MatrixMapSpec s;
  s.lambda0 = 2;
  auto a = build_coefficient_field(sample_white_noise_spatial(g, 1), s);
  for (std::size_t q = 0; q < a.size(); ++q) {
    CHECK(a.a[q] == Mat2::scalar(2));
    CHECK(a.det[q] == Approx(4));
  }
  s.g_amp = 0.7;
  s.beta = 0.5;
  s.theta_amp = 0.4;
  auto c = build_coefficient_field(Field2D(g, 0.3), s);
  CHECK(c.constant());
  CHECK(c.a.front() == s(0.3));
}

TEST_CASE("ellipticity sweep") {
  Grid2D g(64);
  MatrixMapSpec s;
  s.g_amp = 0.25;  // 0.5 tanh shifted to be nonnegative
  auto h = sample_white_noise_spatial(g, 5);
  for (auto& v : h.values) v *= 0.05;
  auto a = build_coefficient_field(h, s);
  CHECK(a.min_eigenvalue() >= 1 - 1e-9);

  MatrixMapSpec bad;
  bad.lambda0 = -1;
  CHECK_THROWS_AS(bad.validate(), EllipticityViolation);
  bad = {};
  bad.beta = -1;
  CHECK_THROWS_AS(bad.validate(), EllipticityViolation);
  Field2D nan(g, NAN);
  CHECK_THROWS_AS(build_coefficient_field(nan, s), EllipticityViolation);
}

TEST_CASE("det and inverse") {
  auto d = det_inverse(Mat2{1, 0, 1});
  CHECK(d.det == 1);
  CHECK(d.inv == Mat2{1, 0, 1});
  d = det_inverse(Mat2{2, 0, 0.5});
  CHECK(d.det == Approx(1));
  CHECK(d.inv.a11 == Approx(0.5));
  CHECK(d.inv.a22 == Approx(2));
  NormalSource ns(3);
  for (int k = 0; k < 100; ++k) {
    double x = ns(), y = ns(), z = ns();
    Mat2 m{1 + x * x, x * y, 1 + y * y + z * z};
    auto r = det_inverse(m);
    CHECK(std::abs(m.a11 * r.inv.a11 + m.a12 * r.inv.a12 - 1) < 1e-12);
    CHECK(std::abs(m.a11 * r.inv.a12 + m.a12 * r.inv.a22) < 1e-12);
    CHECK(std::abs(m.a12 * r.inv.a12 + m.a22 * r.inv.a22 - 1) < 1e-12);
  }
  CHECK_THROWS_AS(det_inverse(Mat2{1, 2, 1}), EllipticityViolation);
}

TEST_CASE("coefficient correlates with the mollified noise") {
  Grid2D g(32);
  MatrixMapSpec s;
  s.g_amp = 1;
  auto sig = make_mollifier(0.25, g), rho = make_mollifier(0.125, g);
  Field2D mu(g);
  const int R = 1000;
  double sa = 0, sx = 0, sax = 0, saa = 0, sxx = 0;
  for (int r = 0; r < R; ++r) {
    auto xi = sample_white_noise_spatial(g, 100 + r);
    auto a = build_coefficient_field(correlated_drift(xi, sig, 1.0, mu), s);
    double av = a.a[0].a11, xv = periodic_convolve(xi, rho).values[0];
    sa += av, sx += xv, sax += av * xv, saa += av * av, sxx += xv * xv;
  }
  double cov = sax / R - sa / R * sx / R;
  double corr = cov / std::sqrt((saa / R - sa * sa / R / R) * (sxx / R - sx * sx / R / R));
  CHECK(corr * std::sqrt(R) > 3);
}
