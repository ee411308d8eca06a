#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agepop/error.hpp"

namespace agepop {

/// Uniform discretization of the age interval [0, A] with n_cells cells.
class AgeGrid {
 public:
  AgeGrid(double max_age, int n_cells) : max_age_(max_age), n_cells_(n_cells) {
    if (!(max_age > 0.0) || !std::isfinite(max_age)) {
      throw ConfigError("AgeGrid: maximum age must be positive, got " + std::to_string(max_age));
    }
    if (n_cells < 1) {
      throw ConfigError("AgeGrid: n_cells must be >= 1, got " + std::to_string(n_cells));
    }
  }

  double max_age() const noexcept { return max_age_; }
  int n_cells() const noexcept { return n_cells_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_cells_) + 1; }
  double step() const noexcept { return max_age_ / n_cells_; }
  double node(std::size_t j) const noexcept {
    return j == static_cast<std::size_t>(n_cells_) ? max_age_ : static_cast<double>(j) * step();
  }

  std::vector<double> nodes() const {
    std::vector<double> out(size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = node(j);
    return out;
  }

  /// Composite trapezoid weights: h/2 at both ends, h inside.
  std::vector<double> trapezoid_weights() const {
    std::vector<double> w(size(), step());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
  }

  friend bool operator==(const AgeGrid& a, const AgeGrid& b) noexcept {
    return a.max_age_ == b.max_age_ && a.n_cells_ == b.n_cells_;
  }

 private:
  double max_age_;
  int n_cells_;
};

/// Real-valued function sampled at the nodes of an AgeGrid.
class GridFn {
 public:
  GridFn() = default;
  explicit GridFn(std::vector<double> values) : values_(std::move(values)) { check_finite(); }
  GridFn(std::size_t n, double fill) : values_(n, fill) { check_finite(); }
  GridFn(std::initializer_list<double> values) : values_(values) { check_finite(); }

  template <typename F>
  static GridFn sample(const AgeGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(j));
    return GridFn(std::move(v));
  }

  static GridFn constant(const AgeGrid& grid, double c) { return GridFn(grid.size(), c); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const noexcept { return values_[j]; }
  double& operator[](std::size_t j) noexcept { return values_[j]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool matches(const AgeGrid& grid) const noexcept { return values_.size() == grid.size(); }

  GridFn& operator*=(double c) {
    for (auto& v : values_) v *= c;
    return *this;
  }
  GridFn& operator+=(const GridFn& o) {
    require_same_size(o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
    return *this;
  }

  friend GridFn operator*(const GridFn& a, const GridFn& b) {
    a.require_same_size(b);
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a.values_[j] * b.values_[j];
    return GridFn(std::move(v));
  }
  friend GridFn operator*(double c, GridFn f) { return f *= c; }
  friend GridFn operator*(GridFn f, double c) { return f *= c; }
  friend GridFn operator+(GridFn a, const GridFn& b) { return a += b; }

  template <typename F>
  GridFn map(F&& f) const {
    std::vector<double> v(size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(values_[j]);
    return GridFn(std::move(v));
  }

  double min() const;
  double max() const;

 private:
  void check_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) throw NumericalError("GridFn: non-finite sample");
    }
  }
  void require_same_size(const GridFn& o) const {
    if (o.size() != size()) {
      throw ConfigError("GridFn: size mismatch (" + std::to_string(size()) + " vs " +
                        std::to_string(o.size()) + ")");
    }
  }

  std::vector<double> values_;
};

inline double GridFn::min() const {
  double m = values_.at(0);
  for (double v : values_) m = v < m ? v : m;
  return m;
}

inline double GridFn::max() const {
  double m = values_.at(0);
  for (double v : values_) m = v > m ? v : m;
  return m;
}

inline void require_on_grid(const GridFn& f, const AgeGrid& grid, const char* what) {
  if (!f.matches(grid)) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(grid.size()) +
                      " samples, got " + std::to_string(f.size()));
  }
}

/// Composite trapezoid approximation of the integral of f over [0, A].
inline double quad(std::span<const double> f, const AgeGrid& grid) {
  if (f.size() != grid.size()) {
    throw ConfigError("quad: expected " + std::to_string(grid.size()) + " samples, got " +
                      std::to_string(f.size()));
  }
  double inner = 0.0;
  for (std::size_t j = 1; j + 1 < f.size(); ++j) inner += f[j];
  return grid.step() * (inner + 0.5 * (f.front() + f.back()));
}

inline double quad(const GridFn& f, const AgeGrid& grid) { return quad(f.values(), grid); }

/// Trapezoid of the product f*g without materializing it.
inline double quad_product(const GridFn& f, const GridFn& g, const AgeGrid& grid) {
  require_on_grid(f, grid, "quad_product");
  require_on_grid(g, grid, "quad_product");
  const std::size_t n = f.size();
  double inner = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) inner += f[j] * g[j];
  return grid.step() * (inner + 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]));
}

/// Running trapezoid integral: out[j] approximates the integral of f over [0, a_j].
inline GridFn cumulative_trapezoid(const GridFn& f, const AgeGrid& grid) {
  require_on_grid(f, grid, "cumulative_trapezoid");
  std::vector<double> out(f.size(), 0.0);
  const double h = grid.step();
  for (std::size_t j = 1; j < f.size(); ++j) out[j] = out[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
  return GridFn(std::move(out));
}

/// Tail integral: out[j] approximates the integral of f over [a_j, A].
inline GridFn tail_trapezoid(const GridFn& f, const AgeGrid& grid) {
  require_on_grid(f, grid, "tail_trapezoid");
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  const double h = grid.step();
  for (std::size_t j = n - 1; j-- > 0;) out[j] = out[j + 1] + 0.5 * h * (f[j] + f[j + 1]);
  return GridFn(std::move(out));
}

}  // namespace agepop
