#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "wick_hermite.hpp"

namespace spde {

struct Pairing {
  std::vector<int> base;                    // J, sorted
  std::vector<std::pair<int, int>> blocks;  // first < second, ordered by first
  bool operator==(const Pairing&) const = default;
};

// P: all pairings. P2: no block {2i-1, 2i}. PN: at most one element of each
// block {Ni+1..Ni+N} per pair, inside P2 as well. PNBlock: block rule only.
enum class PairingKind { P, P2, PN, PNBlock };

struct PairingClass {
  PairingKind kind = PairingKind::P;
  int N = 2;

  bool admits(int a, int b) const {
    if (a > b) std::swap(a, b);
    const bool consecutive = (a % 2 == 1) && b == a + 1;
    const bool same_block = (a - 1) / N == (b - 1) / N;
    switch (kind) {
      case PairingKind::P: return true;
      case PairingKind::P2: return !consecutive;
      case PairingKind::PN: return !consecutive && !same_block;
      case PairingKind::PNBlock: return !same_block;
    }
    return true;
  }
};

inline PairingKind parse_pairing_kind(const std::string& s) {
  if (s == "P") return PairingKind::P;
  if (s == "P2") return PairingKind::P2;
  if (s == "PN") return PairingKind::PN;
  if (s == "PN-block") return PairingKind::PNBlock;
  throw ConfigError("unknown pairing class '" + s + "'");
}

// visits every admissible pairing; order: smallest free element paired with
// partners in increasing order (lexicographic)
inline void for_each_pairing(const std::vector<int>& J, const PairingClass& cls,
                             const std::function<void(const std::vector<std::pair<int, int>>&)>& visit) {
  std::vector<int> base = J;
  std::sort(base.begin(), base.end());
  if (base.size() % 2) return;
  std::vector<char> used(base.size(), 0);
  std::vector<std::pair<int, int>> cur;
  std::function<void()> rec = [&]() {
    std::size_t first = 0;
    while (first < base.size() && used[first]) ++first;
    if (first == base.size()) {
      visit(cur);
      return;
    }
    used[first] = 1;
    for (std::size_t k = first + 1; k < base.size(); ++k) {
      if (used[k] || !cls.admits(base[first], base[k])) continue;
      used[k] = 1;
      cur.push_back({base[first], base[k]});
      rec();
      cur.pop_back();
      used[k] = 0;
    }
    used[first] = 0;
  };
  rec();
}

inline std::vector<Pairing> enumerate_pairings(const std::vector<int>& J, const PairingClass& cls) {
  std::vector<Pairing> out;
  std::vector<int> base = J;
  std::sort(base.begin(), base.end());
  for_each_pairing(base, cls, [&](const std::vector<std::pair<int, int>>& b) { out.push_back({base, b}); });
  return out;
}

inline std::vector<int> iota_set(int m) {
  std::vector<int> J(m);
  std::iota(J.begin(), J.end(), 1);
  return J;
}

inline std::uint64_t double_factorial_odd(int k) {  // (k-1)!! for even k
  std::uint64_t r = 1;
  for (int j = k - 1; j > 1; j -= 2) r *= j;
  return r;
}

// ---- Isserlis ---------------------------------------------------------------

// E[X_{i1} ... X_{ik}] for centred Gaussian X with covariance cov (0-based indices)
inline double isserlis_moment(const Eigen::MatrixXd& cov, const std::vector<int>& idx) {
  if (idx.size() % 2) return 0.0;
  if (idx.empty()) return 1.0;
  for (int i : idx)
    if (i < 0 || i >= cov.rows()) throw DimensionMismatch("index outside covariance");
  // recursion on the first element; memo on the remaining position mask
  const int k = static_cast<int>(idx.size());
  if (k > 24) throw TooLarge("moment order too large");
  std::map<std::uint32_t, double> memo;
  std::function<double(std::uint32_t)> rec = [&](std::uint32_t mask) -> double {
    if (!mask) return 1.0;
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    const int a = __builtin_ctz(mask);
    const std::uint32_t rest = mask & (mask - 1);
    double s = 0;
    for (std::uint32_t r = rest; r; r &= r - 1) {
      const int b = __builtin_ctz(r);
      s += cov(idx[a], idx[b]) * rec(rest & ~(std::uint32_t(1) << b));
    }
    memo[mask] = s;
    return s;
  };
  return rec((std::uint32_t(1) << k) - 1);
}

// ---- polynomial functionals -----------------------------------------------------

struct PolynomialFunctional {
  int nvars = 0;
  std::map<std::vector<int>, double> terms;  // exponent vector -> coefficient

  int degree() const {
    int d = 0;
    for (auto& [e, c] : terms) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
  }
  double operator()(std::span<const double> x) const {
    double s = 0;
    for (auto& [e, c] : terms) {
      double m = c;
      for (int v = 0; v < nvars; ++v)
        for (int p = 0; p < e[v]; ++p) m *= x[v];
      s += m;
    }
    return s;
  }
  PolynomialFunctional derivative(int var) const {
    PolynomialFunctional d{nvars, {}};
    for (auto& [e, c] : terms) {
      if (e[var] == 0) continue;
      auto f = e;
      f[var] -= 1;
      d.terms[f] += c * e[var];
    }
    return d;
  }
  // E[F(X)] with X centred Gaussian, covariance cov (nvars x nvars)
  double expectation(const Eigen::MatrixXd& cov) const {
    double s = 0;
    for (auto& [e, c] : terms) {
      std::vector<int> idx;
      for (int v = 0; v < nvars; ++v)
        for (int p = 0; p < e[v]; ++p) idx.push_back(v);
      s += c * isserlis_moment(cov, idx);
    }
    return s;
  }

  static PolynomialFunctional constant(int nvars, double c) {
    PolynomialFunctional f{nvars, {}};
    f.terms[std::vector<int>(nvars, 0)] = c;
    return f;
  }
  static PolynomialFunctional monomial(int nvars, std::vector<int> e, double c = 1.0) {
    PolynomialFunctional f{nvars, {}};
    f.terms[std::move(e)] = c;
    return f;
  }
  // every monomial of total degree <= deg, coefficients uniform in [-1,1]
  static PolynomialFunctional random(int nvars, int deg, std::uint64_t seed) {
    NormalSource ns(derive_seed(seed, 0xf00d));
    PolynomialFunctional f{nvars, {}};
    std::vector<int> e(nvars, 0);
    std::function<void(int, int)> rec = [&](int v, int left) {
      if (v == nvars) {
        f.terms[e] = 2 * ns.uniform_open() - 1;
        return;
      }
      for (int p = 0; p <= left; ++p) {
        e[v] = p;
        rec(v + 1, left - p);
      }
      e[v] = 0;
    };
    rec(0, deg);
    return f;
  }
};

// ---- integration by parts expansions -------------------------------------------

enum class IbpVariant { plain, wick_pairs, wick_blocks };

// Joint covariance layout: X_1..X_n occupy indices 0..n-1, Z_1..Z_M follow.
struct IbpSetup {
  int n = 1;            // number of X variables
  int m = 1;            // number of factors
  int N = 1;            // Wick block size (wick_blocks)
  IbpVariant variant = IbpVariant::plain;
  PairingKind wick_block_class = PairingKind::PNBlock;

  int z_count() const {
    switch (variant) {
      case IbpVariant::plain: return m;
      case IbpVariant::wick_pairs: return 2 * m;
      default: return N * m;
    }
  }
  PairingClass pairing_class() const {
    switch (variant) {
      case IbpVariant::plain: return {PairingKind::P, 2};
      case IbpVariant::wick_pairs: return {PairingKind::P2, 2};
      default: return {wick_block_class, N};
    }
  }
};

// Right-hand side: sum over even J, admissible pairings of J, maps k: J^c -> X,
// of E[d^k F] prod E[Z Z] prod E[Z_i X_k(i)].
inline double gaussian_ibp_expand(const PolynomialFunctional& F, const Eigen::MatrixXd& cov, const IbpSetup& s) {
  const int M = s.z_count();
  if (F.nvars != s.n || cov.rows() != s.n + M || cov.cols() != s.n + M)
    throw DimensionMismatch("covariance must be (n+M) x (n+M)");
  const Eigen::MatrixXd covX = cov.topLeftCorner(s.n, s.n);
  const auto cls = s.pairing_class();
  auto Z = [&](int i) { return s.n + i - 1; };  // 1-based Z label -> joint index
  double total = 0;
  for (std::uint32_t Jmask = 0; Jmask < (std::uint32_t(1) << M); ++Jmask) {
    if (__builtin_popcount(Jmask) % 2) continue;
    std::vector<int> J, Jc;
    for (int i = 1; i <= M; ++i) ((Jmask >> (i - 1)) & 1 ? J : Jc).push_back(i);
    double pair_sum = 0;
    for_each_pairing(J, cls, [&](const std::vector<std::pair<int, int>>& P) {
      double p = 1;
      for (auto [a, b] : P) p *= cov(Z(a), Z(b));
      pair_sum += p;
    });
    if (pair_sum == 0.0) continue;
    // maps k: Jc -> {0..n-1}
    const int r = static_cast<int>(Jc.size());
    std::vector<int> k(r, 0);
    double map_sum = 0;
    while (true) {
      PolynomialFunctional d = F;
      double cross = 1;
      for (int t = 0; t < r; ++t) {
        d = d.derivative(k[t]);
        cross *= cov(Z(Jc[t]), k[t]);
      }
      if (cross != 0.0 && !d.terms.empty()) map_sum += d.expectation(covX) * cross;
      int t = 0;
      while (t < r && ++k[t] == s.n) k[t++] = 0;
      if (t == r) break;
    }
    total += pair_sum * map_sum;
  }
  return total;
}

// product of the Z factors for one realization of the joint vector
inline double ibp_factor(std::span<const double> joint, const Eigen::MatrixXd& cov, const IbpSetup& s) {
  double prod = 1;
  auto z = [&](int i) { return joint[s.n + i - 1]; };
  auto c = [&](int i, int j) { return cov(s.n + i - 1, s.n + j - 1); };
  switch (s.variant) {
    case IbpVariant::plain:
      for (int i = 1; i <= s.m; ++i) prod *= z(i);
      break;
    case IbpVariant::wick_pairs:
      for (int i = 1; i <= s.m; ++i) prod *= z(2 * i - 1) * z(2 * i) - c(2 * i - 1, 2 * i);
      break;
    case IbpVariant::wick_blocks: {
      std::vector<double> zz(s.N), cc(s.N * s.N);
      for (int b = 0; b < s.m; ++b) {
        for (int a = 0; a < s.N; ++a) {
          zz[a] = z(b * s.N + a + 1);
          for (int e = 0; e < s.N; ++e) cc[a * s.N + e] = c(b * s.N + a + 1, b * s.N + e + 1);
        }
        prod *= wick_product(zz, cc);
      }
      break;
    }
  }
  return prod;
}

inline double ibp_lhs_sample(const PolynomialFunctional& F, std::span<const double> joint, const Eigen::MatrixXd& cov,
                             const IbpSetup& s) {
  return F(joint.subspan(0, s.n)) * ibp_factor(joint, cov, s);
}

// symmetric PSD square root for sampling
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10 * std::max(1.0, ev.maxCoeff())) throw DimensionMismatch("covariance not PSD");
  for (int i = 0; i < ev.size(); ++i) ev[i] = std::sqrt(std::max(0.0, ev[i]));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// random covariance G G^T / d
inline Eigen::MatrixXd random_covariance(int d, std::uint64_t seed) {
  NormalSource ns(derive_seed(seed, 0xc0));
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = ns();
  return G * G.transpose() / d;
}

// Monte Carlo estimate of E[F(X) * factors] for several functionals at once
inline std::vector<McEstimate> ibp_lhs_mc(const std::vector<PolynomialFunctional>& Fs, const Eigen::MatrixXd& cov,
                                          const IbpSetup& s, std::size_t replicas, std::uint64_t seed) {
  const int d = static_cast<int>(cov.rows());
  const Eigen::MatrixXd L = psd_sqrt(cov);
  NormalSource ns(derive_seed(seed, 0x1b9));
  std::vector<double> sum(Fs.size(), 0), sum2(Fs.size(), 0);
  Eigen::VectorXd g(d), x(d);
  std::vector<double> joint(d);
  for (std::size_t r = 0; r < replicas; ++r) {
    for (int i = 0; i < d; ++i) g[i] = ns();
    x.noalias() = L * g;
    for (int i = 0; i < d; ++i) joint[i] = x[i];
    const double fac = ibp_factor(joint, cov, s);
    for (std::size_t f = 0; f < Fs.size(); ++f) {
      const double v = Fs[f](std::span<const double>(joint).subspan(0, s.n)) * fac;
      sum[f] += v;
      sum2[f] += v * v;
    }
  }
  std::vector<McEstimate> out(Fs.size());
  for (std::size_t f = 0; f < Fs.size(); ++f) {
    out[f].count = replicas;
    out[f].mean = sum[f] / replicas;
    out[f].se = std::sqrt(std::max(0.0, sum2[f] / replicas - out[f].mean * out[f].mean) / (replicas - 1));
  }
  return out;
}

}  // namespace spde
