#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "grid.hpp"

namespace spde {

using cplx = std::complex<double>;

// Real 2D transforms on an n x n periodic grid. Spectrum is n x (n/2+1),
// row index i (first axis) carries signed frequency, column j in [0, n/2].
class Fft2D {
 public:
  explicit Fft2D(int n) : n_(n), nh_(n / 2 + 1) {
    std::vector<double> r(static_cast<std::size_t>(n) * n);
    std::vector<cplx> c(static_cast<std::size_t>(n) * nh_);
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    r2c_ = fftw_plan_dft_r2c_2d(n, n, r.data(), cp, FFTW_ESTIMATE | FFTW_UNALIGNED);
    c2r_ = fftw_plan_dft_c2r_2d(n, n, cp, r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~Fft2D() {
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  int n() const { return n_; }
  int half() const { return nh_; }
  std::size_t spectrum_size() const { return static_cast<std::size_t>(n_) * nh_; }
  int freq_row(int i) const { return i <= n_ / 2 ? i : i - n_; }

  // unnormalized forward transform
  void forward(std::span<const double> in, std::span<cplx> out) const {
    fftw_execute_dft_r2c(r2c_, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }
  std::vector<cplx> forward(std::span<const double> in) const {
    std::vector<cplx> out(spectrum_size());
    forward(in, out);
    return out;
  }

  // inverse including the 1/n^2 factor; input is preserved
  void inverse(std::span<const cplx> in, std::span<double> out) const {
    thread_local std::vector<cplx> scratch;
    scratch.assign(in.begin(), in.end());
    fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
    const double s = 1.0 / (static_cast<double>(n_) * n_);
    for (double& v : out) v *= s;
  }
  std::vector<double> inverse(std::span<const cplx> in) const {
    std::vector<double> out(static_cast<std::size_t>(n_) * n_);
    inverse(in, out);
    return out;
  }

 private:
  int n_, nh_;
  fftw_plan r2c_{}, c2r_{};
};

// planner is not thread safe; plans are cached per n and shared
inline const Fft2D& fft_for(int n) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<Fft2D>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& p = cache[n];
  if (!p) p = std::make_unique<Fft2D>(n);
  return *p;
}

// Spectral symbols for the unit-torus derivative operators.
struct SpectralSymbols {
  int n = 0, nh = 0;
  std::vector<double> k1, k2;  // angular wavenumbers per spectrum entry, Nyquist kept
  std::vector<double> d1, d2;  // first-derivative symbols with Nyquist zeroed
  std::vector<double> lap;     // -|k|^2
  std::vector<char> keep23;    // 2/3-rule mask

  explicit SpectralSymbols(const Grid2D& g) : n(g.n), nh(g.n / 2 + 1) {
    const std::size_t m = static_cast<std::size_t>(n) * nh;
    k1.resize(m); k2.resize(m); d1.resize(m); d2.resize(m); lap.resize(m); keep23.resize(m);
    const double tp = 2.0 * M_PI / g.extent;
    const int cut = n / 3;
    for (int i = 0; i < n; ++i) {
      int fi = i <= n / 2 ? i : i - n;
      for (int j = 0; j < nh; ++j) {
        std::size_t q = static_cast<std::size_t>(i) * nh + j;
        k1[q] = tp * fi;
        k2[q] = tp * j;
        d1[q] = (i == n / 2) ? 0.0 : k1[q];
        d2[q] = (j == n / 2) ? 0.0 : k2[q];
        lap[q] = -(k1[q] * k1[q] + k2[q] * k2[q]);
        keep23[q] = (std::abs(fi) <= cut && j <= cut) ? 1 : 0;
      }
    }
  }
};

inline const SpectralSymbols& symbols_for(const Grid2D& g) {
  static std::mutex m;
  static std::map<std::pair<int, double>, std::unique_ptr<SpectralSymbols>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& p = cache[{g.n, g.extent}];
  if (!p) p = std::make_unique<SpectralSymbols>(g);
  return *p;
}

}  // namespace spde
