#pragma once

#include <boost/math/special_functions/binomial.hpp>
#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace spde {

using Rational = boost::rational<std::int64_t>;

// H_0 = 1, H_1 = X, H_N = X H_{N-1} - (N-1) C H_{N-2}
template <class T>
T hermite(int N, const T& X, const T& C) {
  if (N < 0) throw DimensionMismatch("hermite order must be nonnegative");
  T h0 = T(1);
  if (N == 0) return h0;
  T h1 = X;
  for (int k = 2; k <= N; ++k) {
    T h2 = X * h1 - T(k - 1) * C * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// H_N(X+Y, c+d) against sum_n binom(N,n) H_{N-n}(X,c) H_n(Y,d)
template <class T>
std::pair<T, T> hermite_binomial_check(int N, const T& X, const T& Y, const T& c, const T& d) {
  T lhs = hermite<T>(N, X + Y, c + d);
  T rhs = T(0);
  T binom = T(1);
  for (int n = 0; n <= N; ++n) {
    rhs += binom * hermite<T>(N - n, X, c) * hermite<T>(n, Y, d);
    binom = binom * T(N - n) / T(n + 1);
  }
  return {lhs, rhs};
}

// Wick product of z_0..z_{N-1} with covariance cov (row-major N x N), by the
// recursion on the last index, memoized over index subsets.
class WickEvaluator {
 public:
  WickEvaluator(std::span<const double> z, std::span<const double> cov) : z_(z), cov_(cov) {
    n_ = static_cast<int>(z.size());
    if (cov.size() != static_cast<std::size_t>(n_) * n_)
      throw DimensionMismatch("covariance size does not match vector length");
    if (n_ > 24) throw TooLarge("wick product limited to 24 factors");
    memo_.assign(std::size_t(1) << n_, NAN);
    memo_[0] = 1.0;
  }

  double full() { return subset((std::uint32_t(1) << n_) - 1); }

  double subset(std::uint32_t mask) {
    double& m = memo_[mask];
    if (!std::isnan(m)) return m;
    const int last = 31 - __builtin_clz(mask);
    const std::uint32_t rest = mask & ~(std::uint32_t(1) << last);
    double v = z_[last] * subset(rest);
    for (std::uint32_t r = rest; r; r &= r - 1) {
      const int j = __builtin_ctz(r);
      v -= cov_[static_cast<std::size_t>(last) * n_ + j] * subset(rest & ~(std::uint32_t(1) << j));
    }
    m = v;
    return v;
  }

 private:
  std::span<const double> z_, cov_;
  int n_;
  std::vector<double> memo_;
};

inline double wick_product(std::span<const double> z, std::span<const double> cov) {
  if (z.empty()) return 1.0;
  WickEvaluator w(z, cov);
  return w.full();
}

// Smeared Wick power on a finite point set: <1>(x) = w sum_y K(x,y) xi(y), c(x) = Var <1>(x).
// K and cov are row-major points x points; cov is the covariance of xi.
struct WickHermiteSetup {
  int points = 0;
  std::vector<double> K, cov;
  double weight = 1;
};

// (H_N(<1>(x), c(x)), w^N sum_{y_1..y_N} prod K(x,y_i) [xi(y_1) <> ... <> xi(y_N)])
inline std::pair<double, double> wick_hermite_identity_check(int N, const WickHermiteSetup& s,
                                                             std::span<const double> xi, int x) {
  const int P = s.points;
  if (N < 0) throw DimensionMismatch("order must be nonnegative");
  if (s.K.size() != std::size_t(P) * P || s.cov.size() != std::size_t(P) * P || xi.size() != std::size_t(P))
    throw DimensionMismatch("setup sizes disagree");
  if (std::pow(double(P), N) > 1e8) throw TooLarge("points^N above 1e8");
  const double* k = s.K.data() + std::size_t(x) * P;
  double one = 0, c = 0;
  for (int y = 0; y < P; ++y) one += s.weight * k[y] * xi[y];
  for (int y = 0; y < P; ++y)
    for (int z = 0; z < P; ++z) c += s.weight * s.weight * k[y] * k[z] * s.cov[std::size_t(y) * P + z];
  const double lhs = hermite<double>(N, one, c);
  std::vector<int> idx(N, 0);
  std::vector<double> zv(N), cv(std::size_t(N) * N);
  double rhs = 0;
  while (true) {
    double w = 1;
    for (int i = 0; i < N; ++i) {
      w *= s.weight * k[idx[i]];
      zv[i] = xi[idx[i]];
      for (int j = 0; j < N; ++j) cv[std::size_t(i) * N + j] = s.cov[std::size_t(idx[i]) * P + idx[j]];
    }
    rhs += w * wick_product(zv, cv);
    int i = 0;
    while (i < N && ++idx[i] == P) idx[i++] = 0;
    if (i == N) break;
  }
  return {lhs, rhs};
}

struct McEstimate {
  double mean = 0;
  double se = 0;
  std::size_t count = 0;
};

// E[H_N(g,1) H_M(g,1)] for standard Gaussian g
inline McEstimate wick_orthogonality_mc(int N, int M, std::size_t replicas, std::uint64_t seed) {
  NormalSource ns(derive_seed(seed, 0x0a7b));
  double s = 0, s2 = 0;
  for (std::size_t r = 0; r < replicas; ++r) {
    const double g = ns();
    const double v = hermite<double>(N, g, 1.0) * hermite<double>(M, g, 1.0);
    s += v;
    s2 += v * v;
  }
  McEstimate e;
  e.count = replicas;
  e.mean = s / replicas;
  e.se = std::sqrt(std::max(0.0, s2 / replicas - e.mean * e.mean) / (replicas - 1));
  return e;
}

}  // namespace spde
