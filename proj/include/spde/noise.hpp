#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"
#include "mollifier_profile.hpp"
#include "rng.hpp"

namespace spde {

// ---- white noise ---------------------------------------------------------

inline Field2D sample_white_noise_spatial(const Grid2D& g, std::uint64_t seed) {
  g.validate();
  Field2D f(g);
  NormalSource ns(derive_seed(seed, 0x5eed));
  const double s = 1.0 / g.spacing();
  for (double& v : f.values) v = s * ns();
  return f;
}

// one time slice of space-time noise; slice index may be negative (padding)
inline void sample_spacetime_slice(const Grid2D& g, double dt, std::uint64_t seed, std::int64_t k,
                                   std::span<double> out) {
  NormalSource ns(derive_seed(seed, static_cast<std::uint64_t>(k)));
  const double s = 1.0 / (std::sqrt(dt) * g.spacing());
  for (double& v : out) v = s * ns();
}

// cell average of m consecutive fine slices (step dt/m); coarse and fine streams share one noise
inline void sample_coarsened_slice(const Grid2D& g, double dt, std::uint64_t seed, std::int64_t k, int m,
                                   std::span<double> out) {
  if (m == 1) return sample_spacetime_slice(g, dt, seed, k, out);
  std::vector<double> tmp(out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (int j = 0; j < m; ++j) {
    sample_spacetime_slice(g, dt / m, seed, k * m + j, tmp);
    for (std::size_t q = 0; q < out.size(); ++q) out[q] += tmp[q] / m;
  }
}

inline SpaceTimeField sample_white_noise_spacetime(const SpaceTimeGrid& st, std::uint64_t seed) {
  st.validate();
  SpaceTimeField f(st);
  for (int k = 0; k < st.nt; ++k) sample_spacetime_slice(st.grid, st.dt(), seed, k, f.slice(k));
  return f;
}

// ---- mollifiers ----------------------------------------------------------

enum class MollifierDomain { spatial, spacetime };

struct MollifierKernel {
  double delta = 0;
  MollifierDomain domain = MollifierDomain::spatial;
  MollifierShape shape = MollifierShape::bump;
  Grid2D grid;
  std::vector<double> values;      // periodized rho^delta on the grid, sum*h^2 = 1
  std::vector<double> multiplier;  // its Fourier multiplier (real, kernel is even)
  double dt = 0;                   // space-time only
  std::vector<double> time_weights;  // taps for offsets -L..L, sum*dt = 1

  int time_radius() const { return static_cast<int>(time_weights.size() / 2); }
  double at(int di, int dj) const { return values[grid.index(di, dj)]; }
  double time_weight(int l) const { return time_weights[l + time_radius()]; }
};

namespace detail {

inline std::vector<double> periodized_radial(const Grid2D& g, double delta, MollifierShape shape) {
  const int n = g.n;
  const double h = g.spacing();
  std::vector<double> vals(g.size(), 0.0);
  const int images = delta >= 0.5 * g.extent ? 2 : 0;
  for (int i = 0; i < n; ++i) {
    int ai = std::abs(g.min_image(i));
    for (int j = 0; j < n; ++j) {
      int aj = std::abs(g.min_image(j));
      double acc = 0;
      // depends on |offsets| only, so x and -x agree bitwise
      for (int m1 = -images; m1 <= images; ++m1)
        for (int m2 = -images; m2 <= images; ++m2) {
          double y1 = ai * h + m1 * g.extent, y2 = aj * h + m2 * g.extent;
          acc += profile_raw(shape, std::sqrt(y1 * y1 + y2 * y2) / delta);
        }
      vals[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
  double s = 0;
  for (double v : vals) s += v;
  const double c = 1.0 / (s * g.cell_area());
  for (double& v : vals) v *= c;
  return vals;
}

inline std::vector<double> real_multiplier(const Grid2D& g, const std::vector<double>& kernel) {
  const auto& fft = fft_for(g.n);
  auto spec = fft.forward(kernel);
  std::vector<double> m(spec.size());
  for (std::size_t q = 0; q < spec.size(); ++q) m[q] = spec[q].real() * g.cell_area();
  return m;
}

}  // namespace detail

inline MollifierKernel make_mollifier(double delta, const Grid2D& g,
                                      MollifierShape shape = MollifierShape::bump) {
  g.validate();
  if (!(delta > 0 && delta <= 1.0)) throw UnresolvableScale("delta must lie in (0,1]");
  if (delta < 2.0 * g.spacing())
    throw UnresolvableScale("delta=" + std::to_string(delta) + " below 2*spacing");
  MollifierKernel k;
  k.delta = delta;
  k.shape = shape;
  k.grid = g;
  k.values = detail::periodized_radial(g, delta, shape);
  k.multiplier = detail::real_multiplier(g, k.values);
  return k;
}

// product kernel delta^-2 rho1(s/delta^2) * delta^-2 rho2(x/delta)
inline MollifierKernel make_mollifier(double delta, const SpaceTimeGrid& st,
                                      MollifierShape shape = MollifierShape::bump) {
  MollifierKernel k = make_mollifier(delta, st.grid, shape);
  k.domain = MollifierDomain::spacetime;
  k.dt = st.dt();
  const double w = delta * delta;
  if (w < 2.0 * k.dt)
    throw UnresolvableScale("delta^2 below 2*dt: time taps unresolved");
  const int L = static_cast<int>(std::ceil(w / k.dt));
  k.time_weights.assign(2 * L + 1, 0.0);
  double s = 0;
  for (int l = -L; l <= L; ++l) {
    double v = profile_raw(shape, std::abs(l) * k.dt / w);
    k.time_weights[l + L] = v;
    s += v;
  }
  for (double& v : k.time_weights) v /= s * k.dt;
  return k;
}

inline double second_moment(const MollifierKernel& k) {
  const Grid2D& g = k.grid;
  const double h = g.spacing();
  double m = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      double y1 = g.min_image(i) * h, y2 = g.min_image(j) * h;
      m += (y1 * y1 + y2 * y2) * k.at(i, j);
    }
  return m * g.cell_area();
}

// ---- convolution ---------------------------------------------------------

inline void apply_multiplier(const Grid2D& g, const std::vector<double>& mult,
                             std::span<const double> in, std::span<double> out) {
  const auto& fft = fft_for(g.n);
  thread_local std::vector<cplx> spec;
  spec.resize(fft.spectrum_size());
  fft.forward(in, spec);
  for (std::size_t q = 0; q < spec.size(); ++q) spec[q] *= mult[q];
  fft.inverse(spec, out);
}

inline Field2D periodic_convolve(const Field2D& f, const MollifierKernel& k) {
  require_same(f.grid, k.grid, "periodic_convolve");
  Field2D out(f.grid);
  apply_multiplier(f.grid, k.multiplier, f.values, out.values);
  return out;
}

// general periodic convolution of two sampled fields: sum_y f(x-y) g(y) h^2
inline Field2D periodic_convolve(const Field2D& f, const Field2D& kernel) {
  require_same(f.grid, kernel.grid, "periodic_convolve");
  Field2D out(f.grid);
  apply_multiplier(f.grid, detail::real_multiplier(f.grid, kernel.values), f.values, out.values);
  return out;
}

// time direction is circular on the slice index
inline SpaceTimeField periodic_convolve(const SpaceTimeField& f, const MollifierKernel& k) {
  require_same(f.stgrid.grid, k.grid, "periodic_convolve");
  if (k.domain != MollifierDomain::spacetime) throw GridMismatch("space-time field needs space-time kernel");
  if (std::abs(k.dt - f.stgrid.dt()) > 1e-15 * k.dt) throw GridMismatch("time step mismatch");
  const int nt = f.stgrid.nt;
  SpaceTimeField tmp(f.stgrid);
  for (int t = 0; t < nt; ++t) apply_multiplier(k.grid, k.multiplier, f.slice(t), tmp.slice(t));
  SpaceTimeField out(f.stgrid);
  const int L = k.time_radius();
  for (int t = 0; t < nt; ++t) {
    auto o = out.slice(t);
    for (int l = -L; l <= L; ++l) {
      const double w = k.time_weight(l) * k.dt;
      auto s = tmp.slice(((t - l) % nt + nt) % nt);
      for (std::size_t q = 0; q < o.size(); ++q) o[q] += w * s[q];
    }
  }
  return out;
}

inline Field2D correlated_drift(const Field2D& xi, const Field2D& sigma_kernel, const Field2D& mu) {
  require_same(xi.grid, mu.grid, "correlated_drift");
  Field2D h = periodic_convolve(xi, sigma_kernel);
  for (std::size_t q = 0; q < h.size(); ++q) h.values[q] += mu.values[q];
  return h;
}

inline Field2D correlated_drift(const Field2D& xi, const MollifierKernel& sigma, double sigma_amp,
                                const Field2D& mu) {
  require_same(xi.grid, mu.grid, "correlated_drift");
  Field2D h = periodic_convolve(xi, sigma);
  for (std::size_t q = 0; q < h.size(); ++q) h.values[q] = sigma_amp * h.values[q] + mu.values[q];
  return h;
}

inline SpaceTimeField correlated_drift(const SpaceTimeField& xi, const MollifierKernel& sigma,
                                       double sigma_amp, const SpaceTimeField& mu) {
  SpaceTimeField h = periodic_convolve(xi, sigma);
  for (std::size_t q = 0; q < h.values.size(); ++q)
    h.values[q] = sigma_amp * h.values[q] + mu.values[q];
  return h;
}

// Streams mollified space-time noise slice by slice without ever holding the
// whole field. Raw slice k is drawn from derive_seed(seed, k), identical to
// sample_white_noise_spacetime for k in [0, nt); slices before 0 and past nt
// pad the time convolution instead of wrapping it.
class SpaceTimeNoiseStream {
 public:
  SpaceTimeNoiseStream(const SpaceTimeGrid& st, std::uint64_t seed, const MollifierKernel& k, int refine = 1)
      : st_(st), seed_(seed), k_(&k), L_(k.time_radius()), m_(refine) {
    require_same(st.grid, k.grid, "noise stream");
    if (refine < 1) throw GridMismatch("refine must be >= 1");
    if (k.domain != MollifierDomain::spacetime) throw GridMismatch("stream needs space-time kernel");
    next_raw_ = -L_;
    for (int i = 0; i < 2 * L_ + 1; ++i) push_raw();
  }

  // mollified noise at slice index `cur_` then advance
  void next(std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    // ring holds raw slices cur-L..cur+L, spatially mollified
    for (int l = -L_; l <= L_; ++l) {
      const double w = k_->time_weight(l) * k_->dt;
      const auto& s = ring_[L_ - l];
      for (std::size_t q = 0; q < out.size(); ++q) out[q] += w * s[q];
    }
    ++cur_;
    ring_.pop_front();
    push_raw();
  }
  std::int64_t current_index() const { return cur_; }

  // unmollified raw slice for index k (regenerated deterministically)
  void raw_slice(std::int64_t k, std::span<double> out) const {
    sample_coarsened_slice(st_.grid, st_.dt(), seed_, k, m_, out);
  }

 private:
  void push_raw() {
    std::vector<double> raw(st_.grid.size()), sm(st_.grid.size());
    sample_coarsened_slice(st_.grid, st_.dt(), seed_, next_raw_, m_, raw);
    apply_multiplier(st_.grid, k_->multiplier, raw, sm);
    ring_.push_back(std::move(sm));
    ++next_raw_;
  }

  SpaceTimeGrid st_;
  std::uint64_t seed_;
  const MollifierKernel* k_;
  int L_;
  int m_ = 1;
  std::int64_t cur_ = 0;
  std::int64_t next_raw_ = 0;
  std::deque<std::vector<double>> ring_;
};

}  // namespace spde
