#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "agepop/controllers.hpp"
#include "agepop/equilibrium.hpp"
#include "agepop/error.hpp"
#include "agepop/grid.hpp"
#include "agepop/linalg2.hpp"
#include "agepop/trajectory.hpp"
#include "agepop/transform.hpp"

namespace agepop {

/// Open-loop conserved quantity V0 = Phi_1 + Phi_2.
inline double v0(const Eta& eta, const ReducedModel& m) {
  const Eta p = big_phi(eta, m);
  return p[0] + p[1];
}

/// Control Lyapunov function V1 = Phi_1 + (1 + eps) Phi_2.
inline double v1(const Eta& eta, double eps, const ReducedModel& m) {
  const Eta p = big_phi(eta, m);
  return p[0] + (1.0 + eps) * p[1];
}

/// Q = [[beta, (eps - 2 beta (1+eps))/2], [same, beta (1+eps)^2]]; this sign of
/// the off-diagonal entry is the one under which the gain bound on beta is stated.
inline Mat2 q_matrix(double eps, double beta) {
  const double off = 0.5 * (eps - 2.0 * beta * (1.0 + eps));
  return Mat2{beta, off, off, beta * (1.0 + eps) * (1.0 + eps)};
}

/// The matrix for which V1' = -phi^T Q phi holds identically under control A:
/// V1' = eps phi_1 phi_2 - beta (phi_1 + (1+eps) phi_2)^2 puts the opposite sign
/// on the off-diagonal. Same eigenvalues as q_matrix (similar via diag(1, -1)).
inline Mat2 q_matrix_derivative(double eps, double beta) {
  Mat2 q = q_matrix(eps, beta);
  q.a12 = -q.a12;
  q.a21 = -q.a21;
  return q;
}

/// Closed-form smallest eigenvalue of Q, valid for eps > 0 and beta > eps/(4(1+eps)).
inline double lambda_min_q(double eps, double beta) {
  GainsA{eps, beta}.validate();
  const double s = 1.0 + (1.0 + eps) * (1.0 + eps);
  const double num = 4.0 * (1.0 + eps) * beta - eps;
  const double root = std::sqrt(beta * beta * s * s - eps * num);
  return 0.5 * eps * num / (beta * s + root);
}

/// Same quantity from the symmetric 2x2 eigen solve.
inline double lambda_min_q_eig(double eps, double beta) {
  return symmetric_min_eigenvalue(q_matrix(eps, beta));
}

/// gamma_o = (1 + eps) / (2 lambda_min(Q)).
inline double gamma_circ(double eps, double beta) {
  return (1.0 + eps) / (2.0 * lambda_min_q(eps, beta));
}

namespace detail {

inline double h_integrand(double z) {
  if (z == 0.0) return 0.0;
  const double e = std::expm1(z);
  return e * e / z;
}

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline constexpr double kHTolerance = 1e-9;

/// h(p) = int_0^p (e^z - 1)^2 / z dz, by adaptive Simpson with tolerance
/// relative to the magnitude of the integral (h grows like e^{2p}).
inline double h_fn(double p, double tol = kHTolerance) {
  if (p < 0.0) throw ConfigError("h_fn: argument must be nonnegative, got " + std::to_string(p));
  if (p == 0.0) return 0.0;
  const std::function<double(double)> f = detail::h_integrand;
  const double fa = f(0.0), fm = f(0.5 * p), fb = f(p);
  const double whole = detail::simpson(0.0, p, fa, fm, fb);
  return detail::adaptive_simpson(f, 0.0, p, fa, fm, fb, whole, tol * std::max(1.0, std::abs(whole)), 50);
}

/// G = max_a |psi(-a)| e^{sigma (A - a)} / (1 + min(0, min psi)).
inline double g_fn(const HistoryBuffer& psi, double sigma, const AgeGrid& grid) {
  if (psi.size() != grid.size()) throw ConfigError("g_fn: history/grid size mismatch");
  double num = 0.0;
  double lowest = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    num = std::max(num, std::abs(psi[j]) * std::exp(sigma * (grid.max_age() - grid.node(j))));
    lowest = std::min(lowest, psi[j]);
  }
  if (!(lowest > -1.0)) throw NumericalError("g_fn: history sample <= -1");
  return num / (1.0 + lowest);
}

/// Result of the birth-kernel condition search.
struct SigmaResult {
  double kappa = 0.0;
  double sigma = 0.0;
  double j_min = 0.0;           // int |ktilde - z kappa tail(ktilde)| at kappa
  double weighted_at_sigma = 0.0;
};

/// Finds kappa minimizing J(kappa) = int |ktilde - z kappa int_a^A ktilde| (z = 1/int a ktilde)
/// and the largest sigma in (0, 50] with the e^{sigma a}-weighted integral below 1.
inline SigmaResult find_sigma(const GridFn& ktilde, const AgeGrid& grid) {
  require_on_grid(ktilde, grid, "find_sigma");
  const GridFn age = GridFn::sample(grid, [](double a) { return a; });
  const double z = 1.0 / quad(age * ktilde, grid);
  const GridFn tail = tail_trapezoid(ktilde, grid);
  auto residual = [&](double kappa) {
    std::vector<double> r(grid.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = std::abs(ktilde[j] - z * kappa * tail[j]);
    return GridFn(std::move(r));
  };
  auto J = [&](double kappa) { return quad(residual(kappa), grid); };

  // J is convex in kappa; golden section in log kappa from a few starts.
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double best_kappa = 1.0, best_j = std::numeric_limits<double>::infinity();
  const std::array<std::pair<double, double>, 3> starts{{{-3.0, 3.0}, {-3.0, 0.0}, {0.0, 3.0}}};
  for (auto [lo, hi] : starts) {
    lo *= std::log(10.0);
    hi *= std::log(10.0);
    double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
    double f1 = J(std::exp(x1)), f2 = J(std::exp(x2));
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - golden * (hi - lo);
        f1 = J(std::exp(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + golden * (hi - lo);
        f2 = J(std::exp(x2));
      }
    }
    const double kappa = std::exp(0.5 * (lo + hi));
    const double jk = J(kappa);
    if (jk < best_j) {
      best_j = jk;
      best_kappa = kappa;
    }
  }
  if (!(best_j < 1.0)) {
    std::ostringstream msg;
    msg << "find_sigma: birth-kernel condition unverifiable at this resolution (min J = " << best_j
        << " >= 1 at kappa = " << best_kappa << ")";
    throw NumericalError(msg.str());
  }

  const GridFn r = residual(best_kappa);
  auto weighted = [&](double sigma) {
    return quad(r * GridFn::sample(grid, [&](double a) { return std::exp(sigma * a); }), grid);
  };
  SigmaResult out{best_kappa, 0.0, best_j, 0.0};
  constexpr double kSigmaMax = 50.0;
  if (weighted(kSigmaMax) < 1.0) {
    out.sigma = kSigmaMax;
    out.weighted_at_sigma = weighted(kSigmaMax);
    return out;
  }
  double lo = 0.0, hi = kSigmaMax;
  double w_lo = best_j;
  for (int it = 0; it < 200 && w_lo < 1.0 - 1e-6; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double w = weighted(mid);
    if (w < 1.0) {
      lo = mid;
      w_lo = w;
    } else {
      hi = mid;
    }
  }
  out.sigma = lo;
  out.weighted_at_sigma = w_lo;
  return out;
}

/// Safety factor applied to the find_sigma result for the G-functionals.
inline constexpr double kSigmaSafety = 0.9;

enum class RegionMode { D, Dbar };

/// Analysis constants of the composite Lyapunov functional
/// V = V1 + (gamma_1/sigma_1) h(G_1) + (gamma_2/sigma_2) h(G_2).
struct LyapConfig {
  RegionMode mode = RegionMode::D;
  double eps = 0.2;
  double beta = 0.6;
  double delta = 0.0;  // control B only
  std::array<double, 2> gamma{};
  std::array<double, 2> sigma{};
  std::array<double, 2> kappa{};
  double varpi = 0.0;  // Dbar only

  /// Lower bounds on gamma_1, gamma_2 for the mode.
  std::array<double, 2> gamma_lower_bounds(const ReducedModel& m) const {
    if (mode == RegionMode::D) {
      const double gc = gamma_circ(eps, beta);
      return {gc / (m.lambda1 * m.lambda1), m.lambda2 * m.lambda2 * gc};
    }
    const double r = (1.0 + eps) / eps;
    return {2.0 / (m.lambda1 * m.lambda1) * r, 2.0 * m.lambda2 * m.lambda2 * r + 1.0 / varpi};
  }

  void validate(const ReducedModel& m) const {
    if (!(sigma[0] > 0.0) || !(sigma[1] > 0.0)) throw ConfigError("lyapunov: sigma_i must be positive");
    std::ostringstream msg;
    if (mode == RegionMode::D) {
      GainsA{eps, beta}.validate();
    } else {
      if (!(beta > 0.0) || !(delta > 0.0)) {
        throw ConfigError("lyapunov (Dbar): requires beta > 0 and delta > 0");
      }
      if (!(varpi > 0.0 && varpi < beta / delta)) {
        msg << "lyapunov (Dbar): varpi must satisfy 0 < varpi < beta/delta = " << beta / delta
            << ", got " << varpi;
        throw ConfigError(msg.str());
      }
    }
    const auto lb = gamma_lower_bounds(m);
    for (std::size_t i = 0; i < 2; ++i) {
      if (!(gamma[i] > lb[i])) {
        msg << "lyapunov: gamma_" << i + 1 << " must exceed " << lb[i] << ", got " << gamma[i];
        throw ConfigError(msg.str());
      }
    }
  }
};

/// Default configuration for control A: gamma at twice the lower bounds.
inline LyapConfig lyap_config_for_A(const GainsA& g, const ReducedModel& m,
                                    const std::array<SigmaResult, 2>& s,
                                    double gamma_factor = 2.0) {
  LyapConfig c;
  c.mode = RegionMode::D;
  c.eps = g.eps;
  c.beta = g.beta;
  c.sigma = {kSigmaSafety * s[0].sigma, kSigmaSafety * s[1].sigma};
  c.kappa = {s[0].kappa, s[1].kappa};
  const auto lb = c.gamma_lower_bounds(m);
  c.gamma = {gamma_factor * lb[0], gamma_factor * lb[1]};
  c.validate(m);
  return c;
}

/// Default configuration for control B: varpi = beta/(2 delta), gamma at twice the lower bounds.
inline LyapConfig lyap_config_for_B(const GainsB& g, const ReducedModel& m,
                                    const std::array<SigmaResult, 2>& s,
                                    double gamma_factor = 2.0) {
  LyapConfig c;
  c.mode = RegionMode::Dbar;
  c.eps = g.eps;
  c.beta = g.beta;
  c.delta = g.delta;
  c.varpi = g.beta / (2.0 * g.delta);
  c.sigma = {kSigmaSafety * s[0].sigma, kSigmaSafety * s[1].sigma};
  c.kappa = {s[0].kappa, s[1].kappa};
  const auto lb = c.gamma_lower_bounds(m);
  c.gamma = {gamma_factor * lb[0], gamma_factor * lb[1]};
  c.validate(m);
  return c;
}

inline double v_full_from_g(const Eta& eta, double g1, double g2, const LyapConfig& c,
                            const ReducedModel& m) {
  return v1(eta, c.eps, m) + c.gamma[0] / c.sigma[0] * h_fn(g1) + c.gamma[1] / c.sigma[1] * h_fn(g2);
}

inline double v_full(const Eta& eta, const HistoryBuffer& psi1, const HistoryBuffer& psi2,
                     const LyapConfig& c, const ReducedModel& m, const AgeGrid& grid) {
  return v_full_from_g(eta, g_fn(psi1, c.sigma[0], grid), g_fn(psi2, c.sigma[1], grid), c, m);
}

/// H_1, H_2 of the region (eta_1 >= -H_1, eta_2 <= H_2).
inline std::array<double, 2> bounds_H(const LyapConfig& c, const ReducedModel& m) {
  if (c.mode == RegionMode::D) {
    const double gc = gamma_circ(c.eps, c.beta);
    return {std::log(m.lambda1 * std::sqrt(c.gamma[0] / gc)),
            std::log(std::sqrt(c.gamma[1] / gc) / m.lambda2)};
  }
  const double r = c.eps / (1.0 + c.eps);
  return {std::log(m.lambda1 * std::sqrt(r * c.gamma[0] / 2.0)),
          std::log(std::sqrt(r * (c.gamma[1] - 1.0 / c.varpi) / 2.0) / m.lambda2)};
}

/// The third region constraint reads varphi(eta) > -level:
/// level = u*/beta for D (positivity of control A), sqrt(beta^2/varpi^2 - delta^2) for Dbar.
inline double varphi_level(const LyapConfig& c, const ReducedModel& m) {
  if (c.mode == RegionMode::D) return m.u_star / c.beta;
  return std::sqrt(c.beta * c.beta / (c.varpi * c.varpi) - c.delta * c.delta);
}

/// Boundary curve varphi(eta) = -level solved for eta_2; empty when every eta_2
/// satisfies the constraint at this eta_1.
inline std::optional<double> third_boundary_eta2(double eta1, const LyapConfig& c,
                                                 const ReducedModel& m) {
  const double arg =
      1.0 + (-varphi_level(c, m) - phi1(eta1, m.lambda1)) / ((1.0 + c.eps) * m.lambda2);
  if (!(arg > 0.0)) return std::nullopt;
  return std::log(arg);
}

/// Inverse of the boundary curve: eta_1 on varphi(eta) = -level at a given eta_2;
/// empty when no eta_1 reaches the curve (phi_1 is bounded by 1/lambda_1).
inline std::optional<double> third_boundary_eta1(double eta2, const LyapConfig& c,
                                                 const ReducedModel& m) {
  const double target = -varphi_level(c, m) - (1.0 + c.eps) * phi2(eta2, m.lambda2);
  const double arg = 1.0 - m.lambda1 * target;
  if (!(arg > 0.0)) return std::nullopt;
  return -std::log(arg);
}

/// Hyperbola form of the Dbar constraint in q_i = e^{eta_i} - 1: q_2 >= H(q_1).
inline double hyperbola_H(double q1, const LyapConfig& c, const ReducedModel& m) {
  const double b = varphi_level(c, m);
  return (1.0 / (1.0 + q1) - (1.0 + m.lambda1 * b)) / ((1.0 + c.eps) * m.lambda1 * m.lambda2);
}

/// Region membership; depends on eta only.
inline bool in_region(const Eta& eta, const LyapConfig& c, const ReducedModel& m) {
  const auto H = bounds_H(c, m);
  if (!(eta[0] >= -H[0]) || !(eta[1] <= H[1])) return false;
  if (c.mode == RegionMode::D) return m.u_star + c.beta * varphi(eta, c.eps, m) > 0.0;
  return varphi(eta, c.eps, m) > -varphi_level(c, m);
}

inline bool region_D(const Eta& eta, const LyapConfig& c, const ReducedModel& m) {
  if (c.mode != RegionMode::D) throw ConfigError("region_D: configuration is not in D mode");
  return in_region(eta, c, m);
}

inline bool region_Dbar(const Eta& eta, const LyapConfig& c, const ReducedModel& m) {
  if (c.mode != RegionMode::Dbar) throw ConfigError("region_Dbar: configuration is not in Dbar mode");
  return in_region(eta, c, m);
}

/// Which decrease inequality dini_check evaluates.
enum class DiniBound {
  FullA,           // V under control A: W = lmin/2 |phi|^2 + sum gamma_i/2 (e^{G_i}-1)^2
  FullB,           // V under control B
  ReducedA,        // V1 with psi = 0 under control A: W = lmin |phi|^2
  ReducedB,        // V1 with psi = 0 under control B
  Conservation,    // open loop: |dV0/dt| relative to V0
};

struct DiniReport {
  double max_violation = -std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
  std::size_t steps = 0;
};

/// Forward-difference check of a Lyapunov decrease inequality along a recorded
/// trajectory. Each step contributes dV/dt + W - 5 dt (1 + |V|); the maximum is
/// returned (<= tol passes). In Conservation mode the value is |dV0/dt| / V0.
inline DiniReport dini_check(const Trajectory& traj, const LyapConfig& c, const ReducedModel& m,
                             DiniBound bound) {
  if (traj.size() < 2) throw ConfigError("dini_check: trajectory too short");
  const bool needs_v = bound == DiniBound::FullA || bound == DiniBound::FullB;
  if (needs_v && (traj.v.size() != traj.size() || std::isnan(traj.v.front()))) {
    throw ConfigError("dini_check: trajectory lacks recorded Lyapunov series");
  }
  const double lmin = (bound == DiniBound::FullA || bound == DiniBound::ReducedA)
                          ? lambda_min_q(c.eps, c.beta)
                          : 0.0;
  DiniReport rep;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    const Eta& eta = traj.eta[k];
    const Eta p = phi(eta, m);
    double value = 0.0;
    if (bound == DiniBound::Conservation) {
      const double dv = (traj.v0[k + 1] - traj.v0[k]) / dt;
      value = std::abs(dv) / std::max(traj.v0[k], std::numeric_limits<double>::min());
    } else {
      double vk = 0.0, vn = 0.0, w = 0.0;
      const double vp = p[0] + (1.0 + c.eps) * p[1];
      const double neg = std::min(0.0, vp);
      auto gterm = [&](std::size_t i, double g) {
        const double e = std::expm1(g);
        return 0.5 * c.gamma[i] * e * e;
      };
      switch (bound) {
        case DiniBound::FullA:
          vk = traj.v[k];
          vn = traj.v[k + 1];
          w = 0.5 * lmin * (p[0] * p[0] + p[1] * p[1]) + gterm(0, traj.g1[k]) + gterm(1, traj.g2[k]);
          break;
        case DiniBound::FullB:
          vk = traj.v[k];
          vn = traj.v[k + 1];
          w = c.eps / (2.0 * (1.0 + c.eps)) * p[1] * p[1] +
              0.5 * c.beta * vp * vp / std::sqrt(c.delta * c.delta + neg * neg) +
              gterm(0, traj.g1[k]) + gterm(1, traj.g2[k]);
          break;
        case DiniBound::ReducedA:
          vk = traj.v1[k];
          vn = traj.v1[k + 1];
          w = lmin * (p[0] * p[0] + p[1] * p[1]);
          break;
        case DiniBound::ReducedB:
          vk = traj.v1[k];
          vn = traj.v1[k + 1];
          w = c.eps * (1.0 + c.eps) * p[1] * p[1] +
              c.beta * vp * vp / std::sqrt(c.delta * c.delta + neg * neg);
          break;
        case DiniBound::Conservation:
          break;
      }
      value = (vn - vk) / dt + w - 5.0 * dt * (1.0 + std::abs(vk));
    }
    if (value > rep.max_violation) {
      rep.max_violation = value;
      rep.worst_time = traj.times[k];
    }
    ++rep.steps;
  }
  return rep;
}

/// Number of recorded steps where G_i(t + dt) > G_i(t) (1 + (-sigma_i + tol) dt).
inline std::array<std::size_t, 2> g_decrease_violations(const Trajectory& traj,
                                                        const LyapConfig& c, double tol) {
  std::array<std::size_t, 2> count{0, 0};
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    if (traj.g1[k + 1] > traj.g1[k] * (1.0 + (-c.sigma[0] + tol) * dt)) ++count[0];
    if (traj.g2[k + 1] > traj.g2[k] * (1.0 + (-c.sigma[1] + tol) * dt)) ++count[1];
  }
  return count;
}

/// Number of recorded samples t with G_i(t + A) > e^{-sigma_i A} G_i(t) (1 + rel_tol),
/// skipping samples where G_i(t) is below `floor`. A newly born sample enters G
/// at full weight, so G need not fall at rate sigma on every step; over one
/// generation the whole window has been renewed and the decay must show.
inline std::array<std::size_t, 2> g_generation_decay_violations(const Trajectory& traj, const LyapConfig& c,
                                                                double max_age, double rel_tol = 1e-12,
                                                                double floor = 1e-9) {
  std::array<std::size_t, 2> count{0, 0};
  if (traj.size() < 2) return count;
  const double dt = traj.times[1] - traj.times[0];
  const auto lag = static_cast<std::size_t>(std::lround(max_age / dt));
  for (std::size_t k = 0; k + lag < traj.size(); ++k) {
    const std::array<double, 2> now{traj.g1[k], traj.g2[k]};
    const std::array<double, 2> later{traj.g1[k + lag], traj.g2[k + lag]};
    for (std::size_t i = 0; i < 2; ++i) {
      if (now[i] >= floor && later[i] > std::exp(-c.sigma[i] * max_age) * now[i] * (1.0 + rel_tol)) ++count[i];
    }
  }
  return count;
}

/// Reduced-model vector field (psi = 0): eta' = (u* - u - phi_2, u* - u + phi_1).
inline Eta reduced_vector_field(const Eta& eta, double u, const ReducedModel& m) {
  const Eta p = phi(eta, m);
  return {m.u_star - u - p[1], m.u_star - u + p[0]};
}

/// Analytic linearization at eta = 0 of the reduced model under control A.
inline Mat2 closed_loop_jacobian_A(const GainsA& g, const ReducedModel& m) {
  const double b = g.beta, e = g.eps;
  return Mat2{-b / m.lambda1, -(1.0 + b * (1.0 + e)) * m.lambda2, (1.0 - b) / m.lambda1,
              -b * (1.0 + e) * m.lambda2};
}

/// Analytic linearization at eta = 0 of the reduced model under control B (k = beta/delta).
inline Mat2 closed_loop_jacobian_B(const GainsB& g, const ReducedModel& m) {
  const double k = g.beta / g.delta, e = g.eps;
  return Mat2{-k / m.lambda1, -(1.0 + e) * m.lambda2 * (1.0 + k), (1.0 - k) / m.lambda1,
              -e * m.lambda2 - k * (1.0 + e) * m.lambda2};
}

/// Central-difference Jacobian of the closed-loop reduced vector field at eta = 0.
template <typename Law>
Mat2 finite_difference_jacobian(Law&& law, const ReducedModel& m, double h = 1e-6) {
  auto f = [&](const Eta& e) { return reduced_vector_field(e, law(e), m); };
  const Eta fp1 = f({h, 0.0}), fm1 = f({-h, 0.0}), fp2 = f({0.0, h}), fm2 = f({0.0, -h});
  return Mat2{(fp1[0] - fm1[0]) / (2 * h), (fp2[0] - fm2[0]) / (2 * h),
              (fp1[1] - fm1[1]) / (2 * h), (fp2[1] - fm2[1]) / (2 * h)};
}

/// Left side minus right side of the damping condition for control B:
/// (k(1/lambda_1 + lambda_2) + eps lambda_2 (1 + k))^2 - 4 (1 + eps(1 + k)) lambda_2/lambda_1.
inline double damping_discriminant(const GainsB& g, const ReducedModel& m) {
  const double k = g.beta / g.delta, e = g.eps;
  const double b = k * (1.0 / m.lambda1 + m.lambda2) + e * m.lambda2 * (1.0 + k);
  return b * b - 4.0 * (1.0 + e * (1.0 + k)) * m.lambda2 / m.lambda1;
}

}  // namespace agepop
