#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace spde {

struct Grid2D {
  int n = 0;
  double extent = 1.0;

  Grid2D() = default;
  explicit Grid2D(int n_) : n(n_) { validate(); }

  double spacing() const { return extent / n; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(wrap(i)) * n + wrap(j);
  }
  int wrap(int i) const { return ((i % n) + n) % n; }
  // signed minimal-image offset in [-n/2, n/2)
  int min_image(int d) const {
    d = wrap(d);
    return d >= n / 2 ? d - n : d;
  }
  double coord(int i) const { return i * spacing(); }
  double cell_area() const { return spacing() * spacing(); }

  void validate() const {
    if (n < 8 || (n & (n - 1)) != 0)
      throw InvalidGrid("grid size must be a power of two >= 8, got " + std::to_string(n));
    if (!(extent > 0)) throw InvalidGrid("extent must be positive");
  }

  bool operator==(const Grid2D& o) const { return n == o.n && extent == o.extent; }
};

struct SpaceTimeGrid {
  Grid2D grid;
  double t0 = 0.0;
  double t1 = 1.0;
  int nt = 2;

  SpaceTimeGrid() = default;
  SpaceTimeGrid(Grid2D g, double t0_, double t1_, int nt_) : grid(g), t0(t0_), t1(t1_), nt(nt_) {
    validate();
  }

  double dt() const { return (t1 - t0) / nt; }
  double time(int k) const { return t0 + k * dt(); }
  std::size_t size() const { return grid.size() * nt; }
  // dt / spacing^2
  double parabolic_ratio() const { return dt() / grid.cell_area(); }
  bool parabolic_consistent(double factor) const {
    double r = parabolic_ratio();
    return r <= factor && r >= 1.0 / factor;
  }

  void validate() const {
    grid.validate();
    if (!(t0 < t1)) throw InvalidGrid("need t0 < t1");
    if (nt < 2) throw InvalidGrid("need nt >= 2");
  }

  bool operator==(const SpaceTimeGrid& o) const {
    return grid == o.grid && t0 == o.t0 && t1 == o.t1 && nt == o.nt;
  }
};

struct Field2D {
  Grid2D grid;
  std::vector<double> values;

  Field2D() = default;
  explicit Field2D(Grid2D g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  double& operator()(int i, int j) { return values[grid.index(i, j)]; }
  double operator()(int i, int j) const { return values[grid.index(i, j)]; }
  std::size_t size() const { return values.size(); }

  double mean() const {
    double s = 0;
    for (double v : values) s += v;
    return s / values.size();
  }
  double integral() const { return mean() * grid.extent * grid.extent; }
  double sup_norm() const {
    double m = 0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }
};

struct SpaceTimeField {
  SpaceTimeGrid stgrid;
  std::vector<double> values;  // slice-major: k*n*n + i*n + j

  SpaceTimeField() = default;
  explicit SpaceTimeField(SpaceTimeGrid g, double fill = 0.0) : stgrid(g), values(g.size(), fill) {}

  std::span<double> slice(int k) {
    return {values.data() + static_cast<std::size_t>(k) * stgrid.grid.size(), stgrid.grid.size()};
  }
  std::span<const double> slice(int k) const {
    return {values.data() + static_cast<std::size_t>(k) * stgrid.grid.size(), stgrid.grid.size()};
  }
  Field2D slice_field(int k) const {
    Field2D f(stgrid.grid);
    auto s = slice(k);
    std::copy(s.begin(), s.end(), f.values.begin());
    return f;
  }
  void set_slice(int k, const Field2D& f) {
    if (!(f.grid == stgrid.grid)) throw GridMismatch("slice grid mismatch");
    std::copy(f.values.begin(), f.values.end(), slice(k).begin());
  }
  double& operator()(int k, int i, int j) {
    return values[static_cast<std::size_t>(k) * stgrid.grid.size() + stgrid.grid.index(i, j)];
  }
  double operator()(int k, int i, int j) const {
    return values[static_cast<std::size_t>(k) * stgrid.grid.size() + stgrid.grid.index(i, j)];
  }
  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }
};

inline void require_same(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string("grid mismatch: ") + what);
}

}  // namespace spde
