#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "agepop/controllers.hpp"
#include "agepop/equilibrium.hpp"
#include "agepop/error.hpp"
#include "agepop/lyapunov.hpp"

// Region-of-attraction estimate: the region constraints involve eta only and
// the psi-terms of V are nonnegative, so the largest level set of V1 inside the
// region is bounded by c* = inf of V1 over the region boundary.

namespace agepop {

struct BoundaryPiece {
  std::string label;  // "H1", "H2", "u_zero" (mode D) or "phi_bound" (mode Dbar)
  std::vector<Eta> points;
  std::vector<double> v1;
};

struct RoaEstimate {
  RegionMode mode = RegionMode::D;
  double c_star = std::numeric_limits<double>::infinity();
  Eta argmin{};
  std::string active;  // label of the piece attaining c*
  std::array<double, 2> H{};
  std::vector<BoundaryPiece> pieces;
};

inline constexpr std::size_t kRoaSamples = 10000;
/// Extent of the sampled boundary away from the corner of the H-lines.
inline constexpr double kRoaSpan = 30.0;

namespace detail {

/// Golden-section refinement of f on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         double* x_out) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  *x_out = 0.5 * (lo + hi);
  return f(*x_out);
}

}  // namespace detail

/// c* = min of V1 over the boundary of D (or Dbar): the line eta_1 = -H_1, the
/// line eta_2 = H_2 and the curve varphi(eta) = -level, each clipped to the
/// part that bounds the region and sampled at kRoaSamples points, with a
/// golden-section refinement around the sampled minimum.
inline RoaEstimate roa_estimate(const LyapConfig& c, const ReducedModel& m) {
  c.validate(m);
  RoaEstimate out;
  out.mode = c.mode;
  out.H = bounds_H(c, m);
  const double H1 = out.H[0], H2 = out.H[1];
  if (!(H1 > 0.0) || !(H2 > 0.0)) throw ConfigError("roa_estimate: empty region (H_i <= 0)");
  if (!in_region({0.0, 0.0}, c, m)) throw ConfigError("roa_estimate: origin outside the region");

  auto V = [&](const Eta& e) { return v1(e, c.eps, m); };
  // The curve varphi = -level is decreasing in the (eta_1, eta_2) plane and the
  // region lies above it. Parameterize it by eta_2 through its inverse.
  auto curve_eta1 = [&](double eta2) { return third_boundary_eta1(eta2, c, m); };
  const auto corner = third_boundary_eta2(-H1, c, m);  // curve height on the left line

  struct Param {
    std::string label;
    double lo, hi;
    std::function<Eta(double)> at;
  };
  std::vector<Param> params;
  // Left line eta_1 = -H_1, from the curve (or far below) up to the corner.
  {
    const double lo = std::max(corner ? *corner : -kRoaSpan, -kRoaSpan);
    if (lo < H2) params.push_back({"H1", lo, H2, [H1](double s) { return Eta{-H1, s}; }});
  }
  // Top line eta_2 = H_2, from the corner (or the curve crossing) to the right.
  {
    double lo = -H1;
    if (corner && *corner > H2) {
      if (const auto e1 = curve_eta1(H2)) lo = std::max(lo, *e1);
    }
    params.push_back({"H2", lo, lo + kRoaSpan, [H2](double s) { return Eta{s, H2}; }});
  }
  // Curve, for eta_2 below both H_2 and its height at eta_1 = -H_1.
  {
    const std::string label = c.mode == RegionMode::D ? "u_zero" : "phi_bound";
    if (corner) {
      const double hi = std::min(H2, *corner);
      double lo = -kRoaSpan;
      if (!curve_eta1(lo)) {
        // Below a horizontal asymptote the curve has no point; clip to it.
        double a = lo, b = hi;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (a + b);
          (curve_eta1(mid) ? b : a) = mid;
        }
        lo = b;
      }
      if (hi > lo) {
        params.push_back({label, lo, hi, [curve_eta1](double s) { return Eta{*curve_eta1(s), s}; }});
      } else {
        out.pieces.push_back({label, {}, {}});
      }
    } else {
      out.pieces.push_back({label, {}, {}});
    }
  }

  for (const Param& p : params) {
    BoundaryPiece piece{p.label, {}, {}};
    piece.points.reserve(kRoaSamples);
    piece.v1.reserve(kRoaSamples);
    std::size_t best = 0;
    const double step = (p.hi - p.lo) / static_cast<double>(kRoaSamples - 1);
    for (std::size_t s = 0; s < kRoaSamples; ++s) {
      const Eta e = p.at(p.lo + step * static_cast<double>(s));
      piece.points.push_back(e);
      piece.v1.push_back(V(e));
      if (piece.v1.back() < piece.v1[best]) best = s;
    }
    const double a = p.lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
    const double b = p.lo + step * static_cast<double>(std::min(best + 1, kRoaSamples - 1));
    double s_star = p.lo + step * static_cast<double>(best);
    double v_star = piece.v1[best];
    if (b > a) {
      double s_ref = s_star;
      const double v_ref = detail::golden_min([&](double s) { return V(p.at(s)); }, a, b, &s_ref);
      if (v_ref < v_star) {
        v_star = v_ref;
        s_star = s_ref;
      }
    }
    if (v_star < out.c_star) {
      out.c_star = v_star;
      out.argmin = p.at(s_star);
      out.active = p.label;
    }
    out.pieces.push_back(std::move(piece));
  }
  if (!std::isfinite(out.c_star)) throw NumericalError("roa_estimate: no boundary sampled");
  return out;
}

/// Closed contour V1 = c sampled along n rays from the origin (V1 is
/// increasing along every ray since it is convex with minimum 0 at 0).
inline std::vector<Eta> level_set_contour(double c_level, double eps, const ReducedModel& m,
                                          std::size_t n = 720) {
  if (!(c_level > 0.0)) throw ConfigError("level_set_contour: level must be positive");
  std::vector<Eta> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k % n) / static_cast<double>(n);
    const double d1 = std::cos(th), d2 = std::sin(th);
    auto f = [&](double r) { return v1({r * d1, r * d2}, eps, m) - c_level; };
    double lo = 0.0, hi = 1.0;
    while (f(hi) < 0.0 && hi < 1e3) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    out.push_back({lo * d1, lo * d2});
  }
  return out;
}

struct MembershipReport {
  std::size_t inside_level = 0;  // grid points with V1 < c
  std::size_t violations = 0;    // of those, points outside the region
  std::array<double, 4> box{};   // eta1_min, eta1_max, eta2_min, eta2_max
};

/// Rejection test over an n x n grid covering the sublevel set {V1 < c}: counts
/// points of the sublevel set that violate region membership.
inline MembershipReport roa_membership_check(double c_level, const LyapConfig& c,
                                             const ReducedModel& m, std::size_t n = 400) {
  const auto contour = level_set_contour(c_level, c.eps, m);
  MembershipReport rep;
  rep.box = {0.0, 0.0, 0.0, 0.0};
  for (const Eta& e : contour) {
    rep.box[0] = std::min(rep.box[0], e[0]);
    rep.box[1] = std::max(rep.box[1], e[0]);
    rep.box[2] = std::min(rep.box[2], e[1]);
    rep.box[3] = std::max(rep.box[3], e[1]);
  }
  const double pad1 = 0.05 * (rep.box[1] - rep.box[0]);
  const double pad2 = 0.05 * (rep.box[3] - rep.box[2]);
  rep.box = {rep.box[0] - pad1, rep.box[1] + pad1, rep.box[2] - pad2, rep.box[3] + pad2};
  for (std::size_t i = 0; i < n; ++i) {
    const double e1 = rep.box[0] + (rep.box[1] - rep.box[0]) * static_cast<double>(i) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      const double e2 =
          rep.box[2] + (rep.box[3] - rep.box[2]) * static_cast<double>(j) / static_cast<double>(n - 1);
      const Eta e{e1, e2};
      if (v1(e, c.eps, m) < c_level) {
        ++rep.inside_level;
        if (!in_region(e, c, m)) ++rep.violations;
      }
    }
  }
  return rep;
}

}  // namespace agepop
