#pragma once

#include <boost/math/statistics/linear_regression.hpp>
#include <boost/math/statistics/univariate_statistics.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace spde {

struct MeanSe {
  double mean = 0, se = 0;
  std::size_t count = 0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  if (v.size() < 2) throw DimensionMismatch("need at least two samples");
  auto [m, var] = boost::math::statistics::mean_and_sample_variance(v);
  return {m, std::sqrt(var / v.size()), v.size()};
}

inline double sample_variance(const std::vector<double>& v) {
  return boost::math::statistics::sample_variance(v);
}

// slope of y against x
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  auto [c0, c1] = boost::math::statistics::simple_ordinary_least_squares(x, y);
  (void)c0;
  return c1;
}

struct Interval {
  double lo = 0, hi = 0;
  double width() const { return hi - lo; }
};

// percentile bootstrap over replica indices; stat sees a resampled index list
inline Interval bootstrap_ci(std::size_t nrep, int B, std::uint64_t seed,
                             const std::function<double(const std::vector<std::size_t>&)>& stat,
                             double level = 0.95) {
  Engine eng(derive_seed(seed, 0xb007));
  std::uniform_int_distribution<std::size_t> pick(0, nrep - 1);
  std::vector<double> vals;
  vals.reserve(B);
  std::vector<std::size_t> idx(nrep);
  for (int b = 0; b < B; ++b) {
    for (auto& i : idx) i = pick(eng);
    vals.push_back(stat(idx));
  }
  std::sort(vals.begin(), vals.end());
  double a = (1 - level) / 2;
  auto at = [&](double p) {
    double pos = p * (B - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    double f = pos - i;
    return i + 1 < vals.size() ? vals[i] * (1 - f) + vals[i + 1] * f : vals.back();
  };
  return {at(a), at(1 - a)};
}

// Runs fn(i) for i in [0, n). Each index writes its own slot, so results do not
// depend on the thread count; reductions happen afterwards in index order.
inline void parallel_for(std::size_t n, bool serial, const std::function<void(std::size_t)>& fn) {
  unsigned hw = serial ? 1 : std::max(1u, std::thread::hardware_concurrency());
  if (hw <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(hw, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace spde
