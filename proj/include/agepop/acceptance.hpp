#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "agepop/controllers.hpp"
#include "agepop/equilibrium.hpp"
#include "agepop/error.hpp"
#include "agepop/linalg2.hpp"
#include "agepop/lyapunov.hpp"
#include "agepop/model.hpp"
#include "agepop/roa.hpp"
#include "agepop/simulate.hpp"
#include "agepop/transform.hpp"

// The acceptance suite: one check per criterion, each returning a verdict with
// the measured numbers. Shared by the test binary and `agepop verify`.

namespace agepop::acceptance {

enum class Status { Pass, Fail, ResolutionTooLow };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::ResolutionTooLow: return "RESOLUTION_TOO_LOW";
  }
  return "?";
}

struct Verdict {
  int id = 0;
  std::string name;
  Status status = Status::Fail;
  std::string detail;

  bool passed() const { return status == Status::Pass; }
};

struct Options {
  double max_age = 1.0;
  int n_cells = 400;
  double u_star = 0.15;
  KernelShape prey{};
  KernelShape predator{};
  double t_final = 20.0;
  GainsA gains_a{};
  GainsB gains_b{};
};

/// Below this resolution the convergence-sensitive criteria are not meaningful.
inline constexpr int kMinCells = 100;

namespace detail {

class Report {
 public:
  void check(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    if (!text_.empty()) text_ += "; ";
    text_ += (ok ? "" : "[x] ") + what;
  }
  bool ok() const { return ok_; }
  const std::string& text() const { return text_; }

 private:
  bool ok_ = true;
  std::string text_;
};

inline std::string num(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

inline Verdict finish(int id, const char* name, const Report& r) {
  return {id, name, r.ok() ? Status::Pass : Status::Fail, r.text()};
}

inline Verdict too_coarse(int id, const char* name, const Options& o) {
  return {id, name, Status::ResolutionTooLow,
          "resolution too low: n_cells = " + std::to_string(o.n_cells) + " < " +
              std::to_string(kMinCells)};
}

inline AgeGrid grid_of(const Options& o, int n_cells) { return AgeGrid(o.max_age, n_cells); }

inline Scenario scenario_of(const Options& o, int n_cells) {
  const AgeGrid g = grid_of(o, n_cells);
  return prepare_scenario(build_kernels(o.prey, o.predator, g), o.u_star, g);
}

inline SimConfig sim_of(const Options& o, const Scenario& sc, ControllerSpec c, IcSpec ic) {
  SimConfig cfg;
  cfg.kernels = sc.kernels;
  cfg.u_star = o.u_star;
  cfg.grid = sc.eq.grid;
  cfg.t_final = o.t_final;
  cfg.controller = std::move(c);
  cfg.ic = std::move(ic);
  cfg.keep_snapshots = false;
  return cfg;
}

inline double norm(const Eta& e) { return std::hypot(e[0], e[1]); }

inline double min_u(const Trajectory& t) { return *std::min_element(t.u.begin(), t.u.end()); }

inline double max_norm_after(const Trajectory& t, double t0) {
  double m = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t.times[k] >= t0 - 1e-12) m = std::max(m, norm(t.eta[k]));
  }
  return m;
}

/// Smooth history on S_i with sup norm about `amp`.
inline HistoryBuffer small_history(double amp, double phase, const GridFn& ktilde,
                                   const AgeGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    v[j] = amp * std::cos(2.0 * std::numbers::pi * grid.node(j) / grid.max_age() + phase);
  }
  return project_onto_S(HistoryBuffer(std::move(v), grid.max_age()), ktilde, grid);
}

/// Closed-loop run from an initial state inside the level set {V <= c*} of the
/// given Lyapunov configuration; returns the Dini report of the requested bound.
inline DiniReport dini_inside_level_set(const Options& o, const Scenario& sc, const LyapConfig& lc,
                                        ControllerSpec ctrl, DiniBound bound, Report& r,
                                        const std::string& tag) {
  const ReducedModel& m = sc.model;
  const RoaEstimate roa = roa_estimate(lc, m);
  // eta along the fourth-quadrant direction with V1 = c*/2.
  const Eta dir{1.0, -1.0};
  double lo = 0.0, hi = 1.0;
  while (v1({hi * dir[0], hi * dir[1]}, lc.eps, m) < 0.5 * roa.c_star) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (v1({mid * dir[0], mid * dir[1]}, lc.eps, m) < 0.5 * roa.c_star ? lo : hi) = mid;
  }
  const Eta eta0{lo * dir[0], lo * dir[1]};
  double amp = 1e-2;
  IcTransformed ic;
  ic.eta = eta0;
  for (int tries = 0;; ++tries) {
    ic.psi = {small_history(amp, 0.0, sc.eq.ktilde[0], sc.eq.grid),
              small_history(amp, 1.0, sc.eq.ktilde[1], sc.eq.grid)};
    if (v_full(eta0, ic.psi[0], ic.psi[1], lc, m, sc.eq.grid) <= roa.c_star || tries > 60) break;
    amp *= 0.5;
  }
  SimConfig cfg = sim_of(o, sc, std::move(ctrl), ic);
  cfg.lyap = lc;
  const Trajectory tr = simulate_transformed(cfg, sc);
  const double V0 = tr.v.front();
  const DiniReport rep = dini_check(tr, lc, m, bound);
  const auto step_viol = g_decrease_violations(tr, lc, 5.0 * sc.eq.grid.step());
  const auto gen_viol = g_generation_decay_violations(tr, lc, sc.eq.grid.max_age());
  r.check(V0 <= roa.c_star, tag + " V(0) = " + num(V0) + " <= c* = " + num(roa.c_star));
  r.check(rep.max_violation <= 1e-2,
          tag + " max Dini violation " + num(rep.max_violation) + " <= 1e-2 (worst t = " +
              num(rep.worst_time) + ")");
  r.check(gen_viol[0] == 0 && gen_viol[1] == 0,
          tag + " G(t + A) <= e^{-sigma A} G(t) violations " + std::to_string(gen_viol[0]) + ", " +
              std::to_string(gen_viol[1]) + " (info: steps without rate-sigma decrease " +
              std::to_string(step_viol[0]) + ", " + std::to_string(step_viol[1]) + " of " +
              std::to_string(tr.size() - 1) + ")");
  return rep;
}

}  // namespace detail

// ------------------------------------------------------------------ criteria

inline Verdict c01_lotka_sharpe(const Options& o) {
  detail::Report r;
  const AgeGrid g = detail::grid_of(o, o.n_cells);
  const auto z = lotka_sharpe_exponents(build_kernels(o.prey, o.predator, g), g);
  for (std::size_t i = 0; i < 2; ++i) {
    r.check(std::abs(z[i] - 1.17) <= 0.01, "zeta_" + std::to_string(i + 1) + " = " + detail::num(z[i]));
  }
  return detail::finish(1, "Lotka-Sharpe exponent", r);
}

inline Verdict c02_equilibrium(const Options& o) {
  if (o.n_cells < kMinCells) return detail::too_coarse(2, "Equilibrium values", o);
  detail::Report r;
  const AgeGrid g = detail::grid_of(o, o.n_cells);
  const Equilibrium eq = compute_equilibrium(build_kernels(o.prey, o.predator, g), o.u_star, g);
  r.check(std::abs(eq.lambda[0] - 0.98) <= 0.01, "lambda_1 = " + detail::num(eq.lambda[0]));
  r.check(std::abs(eq.lambda[1] - 1.02) <= 0.01, "lambda_2 = " + detail::num(eq.lambda[1]));
  r.check(std::abs(eq.x0_star[0] - 33.81) <= 0.1, "x_1*(0) = " + detail::num(eq.x0_star[0]));
  r.check(std::abs(eq.x0_star[1] - 35.19) <= 0.1, "x_2*(0) = " + detail::num(eq.x0_star[1]));
  const double e1 = std::abs(eq.zeta[0] - eq.lambda[1] - o.u_star);
  const double e2 = std::abs(eq.zeta[1] - 1.0 / eq.lambda[0] - o.u_star);
  r.check(e1 <= 1e-6 && e2 <= 1e-6,
          "identity residuals " + detail::num(e1) + ", " + detail::num(e2) + " <= 1e-6");
  return detail::finish(2, "Equilibrium values", r);
}

inline Verdict c03_open_loop_conservation(const Options& o) {
  if (o.n_cells < kMinCells) return detail::too_coarse(3, "Open-loop conservation", o);
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  // (a) psi_0 = 0: the reduced dynamics conserve V0.
  const Eta eta_fq = to_transformed(ic_from_spec(IcFourthQuadrant{}, sc.eq), sc.eq, sc.adj).eta;
  IcTransformed flat{eta_fq, {HistoryBuffer::zeros(sc.eq.grid), HistoryBuffer::zeros(sc.eq.grid)}};
  const Trajectory tr = simulate_transformed(detail::sim_of(o, sc, OpenLoop{}, flat), sc);
  double drift = 0.0;
  for (double v : tr.v0) drift = std::max(drift, std::abs(v - tr.v0.front()) / tr.v0.front());
  r.check(drift < 1e-3, "V0 relative drift " + detail::num(drift) + " < 1e-3");

  // (b) IC FQ with the direct solver: return to eta(0) after one period. The
  // period is the time of the first local minimum of |eta(t) - eta(0)| once the
  // orbit has moved away by more than half its largest excursion.
  const Trajectory d = simulate_direct(detail::sim_of(o, sc, OpenLoop{}, IcFourthQuadrant{}), sc);
  std::vector<double> dist(d.size());
  double far = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    dist[k] = std::hypot(d.eta[k][0] - d.eta[0][0], d.eta[k][1] - d.eta[0][1]);
    far = std::max(far, dist[k]);
  }
  bool left = false;
  double period = -1.0, ret = -1.0;
  for (std::size_t k = 1; k + 1 < d.size(); ++k) {
    if (dist[k] > 0.5 * far) left = true;
    if (left && dist[k] <= dist[k - 1] && dist[k] <= dist[k + 1]) {
      period = d.times[k];
      ret = dist[k];
      break;
    }
  }
  r.check(period > 0.0 && ret < 0.05,
          "orbit return distance " + detail::num(ret) + " < 0.05 at estimated period " + detail::num(period) +
              " (linear period " + detail::num(2.0 * std::numbers::pi /
                                              std::sqrt(sc.model.lambda2 / sc.model.lambda1)) + ")");
  return detail::finish(3, "Open-loop conservation", r);
}

inline Verdict c04_open_loop_linearization(const Options& o) {
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  const auto eig = open_loop_jacobian_eigs(sc.eq);
  const double w = std::sqrt(sc.model.lambda2 / sc.model.lambda1);
  const double err = std::max(std::abs(eig[0] - std::complex<double>(0.0, -w)),
                              std::abs(eig[1] - std::complex<double>(0.0, w)));
  r.check(err <= 1e-6, "eigenvalues +-i " + detail::num(w) + ", error " + detail::num(err));
  std::vector<double> freq;
  for (double u : {0.05, 0.10, 0.15}) {
    const AgeGrid g = detail::grid_of(o, o.n_cells);
    const Equilibrium eq = compute_equilibrium(build_kernels(o.prey, o.predator, g), u, g);
    freq.push_back(std::abs(open_loop_jacobian_eigs(eq)[1].imag()));
  }
  r.check(freq[0] > freq[1] && freq[1] > freq[2],
          "frequencies at u* = 0.05, 0.10, 0.15: " + detail::num(freq[0]) + ", " + detail::num(freq[1]) +
              ", " + detail::num(freq[2]) + " (decreasing)");
  return detail::finish(4, "Open-loop linearization", r);
}

inline Verdict c05_control_a_fq(const Options& o) {
  if (o.n_cells < kMinCells) return detail::too_coarse(5, "Control A, IC FQ", o);
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  const Trajectory t = simulate_direct(detail::sim_of(o, sc, ControlA{o.gains_a}, IcFourthQuadrant{}), sc);
  const double late = detail::max_norm_after(t, 10.0);
  r.check(late <= 0.05, "max |eta(t)| for t >= 10 = " + detail::num(late) + " <= 0.05");
  r.check(detail::min_u(t) > 0.0, "min u = " + detail::num(detail::min_u(t)) + " > 0");
  return detail::finish(5, "Control A, IC FQ", r);
}

inline Verdict c06_control_a_sq(const Options& o) {
  if (o.n_cells < kMinCells) return detail::too_coarse(6, "Control A, IC SQ", o);
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  const Trajectory t = simulate_direct(detail::sim_of(o, sc, ControlA{o.gains_a}, IcSecondQuadrant{}), sc);
  r.check(detail::min_u(t) < 0.0, "min u = " + detail::num(detail::min_u(t)) + " < 0");
  const double end = detail::norm(t.eta.back());
  r.check(end <= 0.05, "|eta(" + detail::num(t.times.back()) + ")| = " + detail::num(end) + " <= 0.05");
  return detail::finish(6, "Control A, IC SQ", r);
}

inline Verdict c07_control_b(const Options& o) {
  if (o.n_cells < kMinCells) return detail::too_coarse(7, "Control B positivity", o);
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  const double bound = o.gains_b.lower_bound(sc.model);
  r.check(bound > 0.0, "lower bound u* - eps lambda_2 - beta = " + detail::num(bound) + " > 0");
  for (int which = 0; which < 2; ++which) {
    const IcSpec ic = which == 0 ? IcSpec{IcFourthQuadrant{}} : IcSpec{IcSecondQuadrant{}};
    const Trajectory t = simulate_direct(detail::sim_of(o, sc, ControlB{o.gains_b}, ic), sc);
    r.check(detail::min_u(t) >= bound,
            ic_name(ic) + " min u = " + detail::num(detail::min_u(t)) + " >= " + detail::num(bound));
    if (which == 1) {
      const double end = detail::norm(t.eta.back());
      r.check(end <= 0.1, "SQ |eta(" + detail::num(t.times.back()) + ")| = " + detail::num(end) + " <= 0.1");
    }
  }
  return detail::finish(7, "Control B positivity", r);
}

inline Verdict c08_lambda_min(const Options&) {
  detail::Report r;
  for (double eps : {0.1, 0.2, 1.0}) {
    const double beta = eps / (2.0 * (1.0 + eps));
    const double lm = lambda_min_q(eps, beta);
    const double err = std::abs(lm - 0.5 * eps * (1.0 + eps));
    r.check(err <= 1e-12, "eps = " + detail::num(eps) + ": lambda_min = " + detail::num(lm) +
                              ", |lambda_min - eps(1+eps)/2| = " + detail::num(err) +
                              " (Q is diagonal here, so lambda_min = beta = " + detail::num(beta) + ")");
  }
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double eps = 0.02 + 1.98 * i / 49.0;
    const double bmin = GainsA::beta_min(eps);
    for (int j = 0; j < 50; ++j) {
      const double beta = bmin * (1.0 + 1e-3) + (2.0 - bmin) * j / 49.0;
      worst = std::max(worst, std::abs(lambda_min_q(eps, beta) - lambda_min_q_eig(eps, beta)));
    }
  }
  r.check(worst <= 1e-12, "closed form vs eigen solve on 50x50 gain grid: max diff " + detail::num(worst));
  return detail::finish(8, "lambda_min(Q)", r);
}

inline Verdict c09_equivalence(const Options& o) {
  if (o.n_cells < kMinCells) return detail::too_coarse(9, "Solver equivalence", o);
  detail::Report r;
  std::array<double, 2> disc{};
  const std::array<int, 2> cells{200, 400};
  for (std::size_t s = 0; s < 2; ++s) {
    const Scenario sc = detail::scenario_of(o, cells[s]);
    SimConfig cfg = detail::sim_of(o, sc, OpenLoop{}, IcFourthQuadrant{});
    cfg.t_final = 10.0;
    cfg.record_every = cells[s] / 10;
    disc[s] = cross_validate(cfg);
  }
  r.check(disc[0] < 1e-2, "discrepancy at n = 200: " + detail::num(disc[0]) + " < 1e-2");
  r.check(disc[1] < disc[0], "discrepancy at n = 400: " + detail::num(disc[1]) + " (strictly smaller)");
  return detail::finish(9, "Solver equivalence", r);
}

inline Verdict c10_transform(const Options& o) {
  if (o.n_cells < kMinCells) return detail::too_coarse(10, "Transform roundtrip and S-membership", o);
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  for (int which = 0; which < 2; ++which) {
    const IcSpec ic = which == 0 ? IcSpec{IcFourthQuadrant{}} : IcSpec{IcSecondQuadrant{}};
    const std::string tag = ic_name(ic);
    const PopulationState x = ic_from_spec(ic, sc.eq);
    const TransformedState ts = to_transformed(x, sc.eq, sc.adj);
    const PopulationState back = reconstruct(ts, sc.eq);
    double rt = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < x.x[i].size(); ++j) {
        rt = std::max(rt, std::abs(back.x[i][j] - x.x[i][j]) / x.x[i][j]);
      }
    }
    r.check(rt < 1e-10, tag + " roundtrip " + detail::num(rt) + " < 1e-10");
    for (std::size_t i = 0; i < 2; ++i) {
      const std::string s = tag + " psi_" + std::to_string(i + 1);
      r.check(ts.psi[i].min() > -1.0, s + " min " + detail::num(ts.psi[i].min()) + " > -1");
      const auto res = check_S(ts.psi[i], sc.eq.ktilde[i], sc.eq.grid);
      r.check(res.first < 1e-3, s + " |P| " + detail::num(res.first) + " < 1e-3");
      r.check(res.second < 1e-3, s + " renewal residual " + detail::num(res.second) + " < 1e-3");
    }
  }
  return detail::finish(10, "Transform roundtrip and S-membership", r);
}

inline Verdict c11_lyapunov_decrease(const Options& o) {
  if (o.n_cells < kMinCells) return detail::too_coarse(11, "Lyapunov decrease", o);
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  const ReducedModel& m = sc.model;
  const std::array<SigmaResult, 2> sig{find_sigma(sc.eq.ktilde[0], sc.eq.grid),
                                       find_sigma(sc.eq.ktilde[1], sc.eq.grid)};
  const LyapConfig la = lyap_config_for_A(o.gains_a, m, sig);
  const LyapConfig lb = lyap_config_for_B(o.gains_b, m, sig);
  detail::dini_inside_level_set(o, sc, la, ControlA{o.gains_a}, DiniBound::FullA, r, "A/D");
  detail::dini_inside_level_set(o, sc, lb, ControlB{o.gains_b}, DiniBound::FullB, r, "B/Dbar");

  // Reduced model: grad V1 . f(eta, u_A) = -phi^T Q phi at sampled states. The
  // identity holds for the off-diagonal sign of q_matrix_derivative; the
  // residual with the opposite off-diagonal sign is reported alongside.
  const Mat2 Q = q_matrix_derivative(o.gains_a.eps, o.gains_a.beta);
  double worst = 0.0, worst_flipped = 0.0;
  for (int i = -10; i <= 10; ++i) {
    for (int j = -10; j <= 10; ++j) {
      const Eta e{0.3 * i, 0.3 * j};
      const Eta p = phi(e, m);
      const Eta f = reduced_vector_field(e, control_A(e, o.gains_a, m), m);
      const double vdot = p[0] * f[0] + (1.0 + o.gains_a.eps) * p[1] * f[1];
      const double quad_form = Q.a11 * p[0] * p[0] + 2.0 * Q.a12 * p[0] * p[1] + Q.a22 * p[1] * p[1];
      worst = std::max(worst, std::abs(vdot + quad_form) / std::max(1.0, quad_form));
      const double flipped = quad_form - 4.0 * Q.a12 * p[0] * p[1];
      worst_flipped = std::max(worst_flipped, std::abs(vdot + flipped) / std::max(1.0, flipped));
    }
  }
  r.check(worst <= 1e-10, "V1' + phi^T Q phi max residual " + detail::num(worst) +
                              " <= 1e-10 (opposite off-diagonal sign: " + detail::num(worst_flipped) + ")");
  return detail::finish(11, "Lyapunov decrease", r);
}

inline Verdict c12_control_b_damping(const Options& o) {
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  const ReducedModel& m = sc.model;
  auto fd_check = [&](const GainsB& g) {
    const Mat2 J = closed_loop_jacobian_B(g, m);
    const Mat2 F = finite_difference_jacobian([&](const Eta& e) { return control_B(e, g, m); }, m);
    return std::max({std::abs(J.a11 - F.a11), std::abs(J.a12 - F.a12), std::abs(J.a21 - F.a21),
                     std::abs(J.a22 - F.a22)});
  };
  GainsB sharp = o.gains_b;
  sharp.delta = 0.01;
  {
    const auto ev = eigenvalues(closed_loop_jacobian_B(sharp, m));
    const double d = damping_discriminant(sharp, m);
    r.check(d > 0.0 && ev[0].imag() == 0.0 && ev[1].real() < 0.0,
            "delta = 0.01: discriminant " + detail::num(d) + ", eigenvalues " + detail::num(ev[0].real()) +
                ", " + detail::num(ev[1].real()) + " (real, negative)");
    r.check(fd_check(sharp) < 1e-5, "delta = 0.01: analytic vs finite-difference Jacobian " +
                                        detail::num(fd_check(sharp)));
  }
  {
    const auto ev = eigenvalues(closed_loop_jacobian_B(o.gains_b, m));
    r.check(ev[1].imag() != 0.0 && ev[1].real() < 0.0,
            "delta = " + detail::num(o.gains_b.delta) + ": eigenvalues " + detail::num(ev[1].real()) + " +- " +
                detail::num(std::abs(ev[1].imag())) + "i (complex, stable)");
    r.check(fd_check(o.gains_b) < 1e-5, "default delta: analytic vs finite-difference Jacobian " +
                                            detail::num(fd_check(o.gains_b)));
  }
  GainsB zero = o.gains_b;
  zero.beta = 0.0;
  r.check(is_hurwitz(closed_loop_jacobian_B(zero, m)), "beta = 0: Jacobian Hurwitz");
  return detail::finish(12, "Control B damping", r);
}

inline Verdict c13_roa_geometry(const Options& o) {
  detail::Report r;
  const Scenario sc = detail::scenario_of(o, o.n_cells);
  const std::array<SigmaResult, 2> sig{find_sigma(sc.eq.ktilde[0], sc.eq.grid),
                                       find_sigma(sc.eq.ktilde[1], sc.eq.grid)};
  const LyapConfig la = lyap_config_for_A(o.gains_a, sc.model, sig);
  const RoaEstimate roa = roa_estimate(la, sc.model);
  const MembershipReport mr = roa_membership_check(roa.c_star, la, sc.model, 400);
  r.check(roa.c_star > 0.0, "c* = " + detail::num(roa.c_star) + " on " + roa.active);
  r.check(mr.inside_level > 0 && mr.violations == 0,
          std::to_string(mr.violations) + " violations among " + std::to_string(mr.inside_level) +
              " sublevel grid points (400x400)");
  return detail::finish(13, "ROA level set inside D", r);
}

using Criterion = std::function<Verdict(const Options&)>;

inline const std::vector<Criterion>& all_criteria() {
  static const std::vector<Criterion> list{
      c01_lotka_sharpe, c02_equilibrium,   c03_open_loop_conservation, c04_open_loop_linearization,
      c05_control_a_fq, c06_control_a_sq,  c07_control_b,              c08_lambda_min,
      c09_equivalence,  c10_transform,     c11_lyapunov_decrease,      c12_control_b_damping,
      c13_roa_geometry};
  return list;
}

/// Runs one criterion, converting library errors into failed verdicts.
inline Verdict run(std::size_t index, const Options& o) {
  try {
    return all_criteria().at(index)(o);
  } catch (const Error& e) {
    return {static_cast<int>(index + 1), "criterion " + std::to_string(index + 1), Status::Fail,
            std::string("error: ") + e.what()};
  }
}

inline std::string format_line(const Verdict& v) {
  std::ostringstream o;
  o << "[" << status_name(v.status) << "] criterion " << v.id << " - " << v.name << ": " << v.detail;
  return o.str();
}

}  // namespace agepop::acceptance
