#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "agepop/controllers.hpp"
#include "agepop/equilibrium.hpp"
#include "agepop/error.hpp"
#include "agepop/grid.hpp"
#include "agepop/lyapunov.hpp"
#include "agepop/model.hpp"
#include "agepop/trajectory.hpp"
#include "agepop/transform.hpp"

// Two independent time integrators on the locked grid dt = da:
//  * direct: method of characteristics for the population PDE, implicit
//    trapezoid renewal boundary;
//  * transformed: Heun steps for eta plus the renewal delay equation for psi.

namespace agepop {

// ---------------------------------------------------------------- initial data

/// x_1 = x_1* e^{1+2a}, x_2 = x_2* e^{-1-2a} (prey over-, predator underpopulated).
struct IcFourthQuadrant {};
/// The swap of the fourth-quadrant profile.
struct IcSecondQuadrant {};
/// x = x*.
struct IcEquilibrium {};
/// x_i = x_i* m_i on the grid.
struct IcMultipliers {
  std::array<GridFn, 2> m;
};
/// Explicit profiles x_i on the grid.
struct IcProfiles {
  std::array<GridFn, 2> x;
};
/// x_i = x_i* e^{eta_i} (1 + psi_i(-a)).
struct IcTransformed {
  Eta eta{};
  std::array<HistoryBuffer, 2> psi;
};

using IcSpec =
    std::variant<IcFourthQuadrant, IcSecondQuadrant, IcEquilibrium, IcMultipliers, IcProfiles, IcTransformed>;

inline std::string ic_name(const IcSpec& ic) {
  struct {
    std::string operator()(const IcFourthQuadrant&) const { return "FQ"; }
    std::string operator()(const IcSecondQuadrant&) const { return "SQ"; }
    std::string operator()(const IcEquilibrium&) const { return "equilibrium"; }
    std::string operator()(const IcMultipliers&) const { return "multipliers"; }
    std::string operator()(const IcProfiles&) const { return "profiles"; }
    std::string operator()(const IcTransformed&) const { return "transformed"; }
  } v;
  return std::visit(v, ic);
}

inline PopulationState ic_from_spec(const IcSpec& spec, const Equilibrium& eq) {
  const AgeGrid& grid = eq.grid;
  PopulationState s;
  s.t = 0.0;
  const GridFn up = GridFn::sample(grid, [](double a) { return std::exp(1.0 + 2.0 * a); });
  const GridFn down = GridFn::sample(grid, [](double a) { return std::exp(-1.0 - 2.0 * a); });
  if (std::holds_alternative<IcFourthQuadrant>(spec)) {
    s.x = {eq.x_star[0] * up, eq.x_star[1] * down};
  } else if (std::holds_alternative<IcSecondQuadrant>(spec)) {
    s.x = {eq.x_star[0] * down, eq.x_star[1] * up};
  } else if (std::holds_alternative<IcEquilibrium>(spec)) {
    s.x = eq.x_star;
  } else if (const auto* mul = std::get_if<IcMultipliers>(&spec)) {
    for (std::size_t i = 0; i < 2; ++i) {
      require_on_grid(mul->m[i], grid, "initial multiplier");
      s.x[i] = eq.x_star[i] * mul->m[i];
    }
  } else if (const auto* prof = std::get_if<IcProfiles>(&spec)) {
    for (std::size_t i = 0; i < 2; ++i) require_on_grid(prof->x[i], grid, "initial profile");
    s.x = prof->x;
  } else {
    const auto& tr = std::get<IcTransformed>(spec);
    TransformedState ts;
    ts.eta = tr.eta;
    ts.psi = tr.psi;
    s = reconstruct(ts, eq);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    if (!(s.x[i].min() > 0.0)) {
      throw ConfigError("initial condition: profile of species " + std::to_string(i + 1) +
                        " must be strictly positive");
    }
  }
  return s;
}

// ---------------------------------------------------------------- configuration

/// Treatment of the interaction coupling within a step; the dilution u is held
/// over the step in every case.
///  * Held: coupling frozen at time t (first order in dt).
///  * SecondOrder: the direct solver extrapolates the interaction terms to the
///    step midpoint, 3/2 L(t) - 1/2 L(t - dt) (Adams-Bashforth); the transformed
///    solver uses v at t and t + dt in its two Heun stages. The two solvers then
///    have different O(dt^2) truncation errors, so their agreement is a genuine
///    convergence check.
enum class Coupling { Held, SecondOrder };

struct SimConfig {
  KernelSet kernels;
  double u_star = 0.15;
  AgeGrid grid{1.0, 400};
  double dt = 0.0;  // 0 selects the locked value da; any other value must equal it
  double t_final = 20.0;
  ControllerSpec controller = OpenLoop{};
  IcSpec ic = IcFourthQuadrant{};
  int record_every = 40;  // snapshot stride in steps
  Coupling coupling = Coupling::SecondOrder;
  bool keep_snapshots = true;
  std::optional<LyapConfig> lyap;

  double step() const { return grid.step(); }

  std::size_t n_steps() const {
    const double h = grid.step();
    if (dt != 0.0 && std::abs(dt - h) > 1e-12 * h) {
      std::ostringstream msg;
      msg << "simulation: dt must equal the age step " << h << " (got " << dt << ")";
      throw ConfigError(msg.str());
    }
    if (!(t_final >= h * (1.0 - 1e-12))) {
      std::ostringstream msg;
      msg << "simulation: t_final must be at least dt = " << h << " (got " << t_final << ")";
      throw ConfigError(msg.str());
    }
    if (record_every < 1) throw ConfigError("simulation: record_every must be a positive integer");
    return static_cast<std::size_t>(std::llround(t_final / h));
  }
};

/// Equilibrium-dependent quantities shared by both solvers.
struct Scenario {
  KernelSet kernels;
  Equilibrium eq;
  std::array<AdjointData, 2> adj;
  std::array<GridFn, 2> gbar;
  ReducedModel model;
};

inline Scenario prepare_scenario(const KernelSet& ks, double u_star, const AgeGrid& grid) {
  Scenario sc;
  sc.kernels = ks;
  sc.eq = compute_equilibrium(ks, u_star, grid);
  sc.adj = compute_adjoint(ks, sc.eq);
  sc.gbar = g_bar(ks, sc.eq);
  sc.model = reduced(sc.eq);
  return sc;
}

// ---------------------------------------------------------------- direct solver

/// (I_1, I_2) = (int g_1 x_2, 1 / int g_2 x_1).
inline std::array<double, 2> interaction_terms(const PopulationState& state, const KernelSet& ks,
                                               const AgeGrid& grid) {
  const double predation = quad_product(ks[kPrey].g, state.x[kPredator], grid);
  const double food = quad_product(ks[kPredator].g, state.x[kPrey], grid);
  if (!(food > 0.0)) {
    std::ostringstream msg;
    msg << "interaction_terms: int g_2 x_1 = " << food << " <= 0 at t = " << state.t
        << " (prey collapse; predator starvation rate is singular)";
    throw NumericalError(msg.str());
  }
  return {predation, 1.0 / food};
}

namespace detail {

/// Solves x(0) = sum_j w_j k_j x_j with the a = 0 term moved to the left.
inline double renewal_boundary(const std::vector<double>& x, const GridFn& k, const AgeGrid& grid) {
  const auto w = grid.trapezoid_weights();
  const double diag = 1.0 - w[0] * k[0];
  if (!(diag > 0.0)) {
    std::ostringstream msg;
    msg << "renewal boundary: 1 - w_0 k(0) = " << diag
        << " <= 0; the age grid is too coarse for the birth kernel";
    throw NumericalError(msg.str());
  }
  double s = 0.0;
  for (std::size_t j = 1; j < x.size(); ++j) s += w[j] * k[j] * x[j];
  return s / diag;
}

}  // namespace detail

/// Characteristic step of length dt = da with given interaction rates L:
/// x_i(a_j, t + dt) = x_i(a_{j-1}, t) exp(-(mean mu_i + u + L_i) dt), newborns
/// from the implicit trapezoid renewal sum.
inline PopulationState transport_step(const PopulationState& state, double u,
                                      const std::array<double, 2>& L, const KernelSet& ks,
                                      const AgeGrid& grid, double dt) {
  const double h = grid.step();
  if (std::abs(dt - h) > 1e-12 * h) throw ConfigError("step_direct: dt must equal the age step");
  PopulationState next;
  next.t = state.t + dt;
  for (std::size_t i = 0; i < 2; ++i) {
    const GridFn& mu = ks[i].mu;
    const GridFn& x = state.x[i];
    std::vector<double> y(grid.size());
    for (std::size_t j = 1; j < y.size(); ++j) {
      y[j] = x[j - 1] * std::exp(-(0.5 * (mu[j - 1] + mu[j]) + u + L[i]) * dt);
    }
    y[0] = detail::renewal_boundary(y, ks[i].k, grid);
    for (double v : y) {
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "step_direct: non-finite density at t = " << next.t;
        throw NumericalError(msg.str());
      }
    }
    next.x[i] = GridFn(std::move(y));
  }
  return next;
}

/// One characteristic step with u and the interaction terms held at time t.
inline PopulationState step_direct(const PopulationState& state, double u, const KernelSet& ks,
                                   const AgeGrid& grid, double dt) {
  return transport_step(state, u, interaction_terms(state, ks, grid), ks, grid, dt);
}

// ---------------------------------------------------------------- transformed solver

/// eta' = (u* - u - phi_2(eta_2 + v_2), u* - u + phi_1(eta_1 + v_1)).
inline Eta eta_rate(const Eta& eta, const std::array<double, 2>& v, double u, const ReducedModel& m) {
  return reduced_vector_field({eta[0] + v[0], eta[1] + v[1]}, u, m);
}

/// Advances one step. Each psi history is first updated by the implicit
/// trapezoid renewal rule (psi is autonomous), then eta takes a Heun step with u
/// held; v = (v_1, v_2) is held at time t (Coupling::Held) or taken at t and
/// t + dt in the two Heun stages (Coupling::SecondOrder).
inline TransformedState step_transformed(const TransformedState& ts, double u, const Scenario& sc,
                                         double dt, Coupling coupling = Coupling::Held) {
  const AgeGrid& grid = sc.eq.grid;
  const double h = grid.step();
  if (std::abs(dt - h) > 1e-12 * h) throw ConfigError("step_transformed: dt must equal the age step");

  TransformedState next;
  next.t = ts.t + dt;
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<double> shifted(ts.psi[i].size());
    for (std::size_t j = 1; j < shifted.size(); ++j) shifted[j] = ts.psi[i][j - 1];
    double newest = 0.0;
    try {
      newest = detail::renewal_boundary(shifted, sc.eq.ktilde[i], grid);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("step_transformed: ") + e.what());
    }
    if (!(newest > -1.0)) {
      std::ostringstream msg;
      msg << "step_transformed: psi_" << i + 1 << " = " << newest << " <= -1 at t = " << next.t
          << " (admissibility lost)";
      throw NumericalError(msg.str());
    }
    next.psi[i] = ts.psi[i];
    next.psi[i].push(newest);
  }

  auto v_of = [&](const std::array<HistoryBuffer, 2>& psi) {
    return std::array<double, 2>{v_map(psi[0], sc.gbar[1], grid), v_map(psi[1], sc.gbar[0], grid)};
  };
  const std::array<double, 2> v0 = v_of(ts.psi);
  const std::array<double, 2> v1 = coupling == Coupling::Held ? v0 : v_of(next.psi);
  const Eta k1 = eta_rate(ts.eta, v0, u, sc.model);
  const Eta pred{ts.eta[0] + dt * k1[0], ts.eta[1] + dt * k1[1]};
  const Eta k2 = eta_rate(pred, v1, u, sc.model);
  next.eta = {ts.eta[0] + 0.5 * dt * (k1[0] + k2[0]), ts.eta[1] + 0.5 * dt * (k1[1] + k2[1])};
  if (!std::isfinite(next.eta[0]) || !std::isfinite(next.eta[1])) {
    std::ostringstream msg;
    msg << "step_transformed: non-finite eta at t = " << next.t;
    throw NumericalError(msg.str());
  }
  return next;
}

// ---------------------------------------------------------------- driver

namespace detail {

struct Recorder {
  const SimConfig& cfg;
  const Scenario& sc;
  Trajectory traj;
  double eps;

  void record(double t, const Eta& eta, const std::array<HistoryBuffer, 2>& psi, double u,
              const PopulationState* snapshot) {
    traj.times.push_back(t);
    traj.eta.push_back(eta);
    traj.u.push_back(u);
    traj.v0.push_back(v0(eta, sc.model));
    traj.v1.push_back(v1(eta, eps, sc.model));
    traj.psi_sup.push_back({psi[0].sup_norm(), psi[1].sup_norm()});
    if (cfg.lyap) {
      const double g1 = g_fn(psi[0], cfg.lyap->sigma[0], sc.eq.grid);
      const double g2 = g_fn(psi[1], cfg.lyap->sigma[1], sc.eq.grid);
      traj.g1.push_back(g1);
      traj.g2.push_back(g2);
      traj.v.push_back(v_full_from_g(eta, g1, g2, *cfg.lyap, sc.model));
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      traj.g1.push_back(nan);
      traj.g2.push_back(nan);
      traj.v.push_back(nan);
    }
    if (snapshot != nullptr) traj.snapshots.push_back(*snapshot);
  }
};

inline double evaluate_on_state(const SimConfig& cfg, const Scenario& sc, const Eta& eta,
                                const PopulationState& state) {
  std::array<double, 2> y{0.0, 0.0};
  if (const auto* m = std::get_if<MeasuredA>(&cfg.controller)) {
    y = measure(state, m->sensors, sc.eq.grid);
  }
  const double u = evaluate_controller(cfg.controller, eta, y, sc.model);
  if (!std::isfinite(u)) {
    std::ostringstream msg;
    msg << "controller produced a non-finite dilution at t = " << state.t;
    throw NumericalError(msg.str());
  }
  return u;
}

inline bool snapshot_due(const SimConfig& cfg, std::size_t step, std::size_t n_steps) {
  return cfg.keep_snapshots &&
         (step % static_cast<std::size_t>(cfg.record_every) == 0 || step == n_steps);
}

}  // namespace detail

inline Trajectory simulate_direct(const SimConfig& cfg, const Scenario& sc) {
  const std::size_t n_steps = cfg.n_steps();
  validate_controller(cfg.controller, sc.model);
  if (cfg.lyap) cfg.lyap->validate(sc.model);
  const double dt = cfg.step();
  detail::Recorder rec{cfg, sc, {}, controller_eps(cfg.controller)};
  rec.traj.solver = "direct";

  PopulationState state = ic_from_spec(cfg.ic, sc.eq);
  std::optional<std::array<double, 2>> L_prev;
  for (std::size_t step = 0;; ++step) {
    const TransformedState ts = to_transformed(state, sc.eq, sc.adj);
    const double u = detail::evaluate_on_state(cfg, sc, ts.eta, state);
    rec.record(state.t, ts.eta, ts.psi, u, detail::snapshot_due(cfg, step, n_steps) ? &state : nullptr);
    if (step == n_steps) break;
    const auto L_now = interaction_terms(state, sc.kernels, sc.eq.grid);
    auto L = L_now;
    if (cfg.coupling == Coupling::SecondOrder && L_prev) {
      for (std::size_t i = 0; i < 2; ++i) L[i] = 1.5 * L_now[i] - 0.5 * (*L_prev)[i];
    }
    L_prev = L_now;
    state = transport_step(state, u, L, sc.kernels, sc.eq.grid, dt);
    state.t = static_cast<double>(step + 1) * dt;
  }
  return std::move(rec.traj);
}

inline Trajectory simulate_transformed(const SimConfig& cfg, const Scenario& sc) {
  const std::size_t n_steps = cfg.n_steps();
  validate_controller(cfg.controller, sc.model);
  if (cfg.lyap) cfg.lyap->validate(sc.model);
  const double dt = cfg.step();
  detail::Recorder rec{cfg, sc, {}, controller_eps(cfg.controller)};
  rec.traj.solver = "transformed";

  // The continuum split leaves an O(h) component along the neutral mode of the
  // discrete renewal recursion, which would then persist forever; re-split so
  // that psi decays as in the direct solver. The population is unchanged.
  TransformedState ts =
      remove_discrete_neutral_mode(to_transformed(ic_from_spec(cfg.ic, sc.eq), sc.eq, sc.adj), sc.eq);
  for (std::size_t step = 0;; ++step) {
    const bool snap = detail::snapshot_due(cfg, step, n_steps);
    const bool need_x = snap || needs_measurement(cfg.controller);
    PopulationState x;
    if (need_x) x = reconstruct(ts, sc.eq);
    x.t = ts.t;
    const double u = detail::evaluate_on_state(cfg, sc, ts.eta, x);
    rec.record(ts.t, ts.eta, ts.psi, u, snap ? &x : nullptr);
    if (step == n_steps) break;
    ts = step_transformed(ts, u, sc, dt, cfg.coupling);
    ts.t = static_cast<double>(step + 1) * dt;
  }
  return std::move(rec.traj);
}

inline Trajectory simulate_direct(const SimConfig& cfg) {
  return simulate_direct(cfg, prepare_scenario(cfg.kernels, cfg.u_star, cfg.grid));
}

inline Trajectory simulate_transformed(const SimConfig& cfg) {
  return simulate_transformed(cfg, prepare_scenario(cfg.kernels, cfg.u_star, cfg.grid));
}

/// Max over recorded snapshots and nodes of |x_direct - x_transformed| / x_transformed.
inline double cross_validate(const SimConfig& cfg) {
  SimConfig c = cfg;
  c.keep_snapshots = true;
  const Scenario sc = prepare_scenario(c.kernels, c.u_star, c.grid);
  const Trajectory d = simulate_direct(c, sc);
  const Trajectory t = simulate_transformed(c, sc);
  if (d.snapshots.size() != t.snapshots.size()) {
    throw NumericalError("cross_validate: solvers recorded different snapshot counts");
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < d.snapshots.size(); ++s) {
    for (std::size_t i = 0; i < 2; ++i) {
      const GridFn& a = d.snapshots[s].x[i];
      const GridFn& b = t.snapshots[s].x[i];
      for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]) / b[j]);
    }
  }
  return worst;
}

/// Least-squares slope of ln sup_a |psi_i(t - a)| over recorded times in [t_from, t_to].
inline double psi_envelope_slope(const Trajectory& traj, std::size_t species, double t_from,
                                 double t_to) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    const double s = traj.psi_sup[k][species];
    if (t < t_from || t > t_to || !(s > 0.0)) continue;
    const double y = std::log(s);
    n += 1;
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den == 0.0) throw ConfigError("psi_envelope_slope: not enough samples in window");
  return (n * sxy - sx * sy) / den;
}

}  // namespace agepop
