#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <variant>

#include "agepop/equilibrium.hpp"
#include "agepop/error.hpp"
#include "agepop/model.hpp"
#include "agepop/transform.hpp"

namespace agepop {

using Eta = std::array<double, 2>;

namespace detail {
inline constexpr double kEtaClamp = 700.0;
inline double clamp_eta(double e) { return std::clamp(e, -kEtaClamp, kEtaClamp); }
}  // namespace detail

/// phi_1 = (1 - e^{-eta_1}) / lambda_1 (bounded above by 1/lambda_1),
/// phi_2 = lambda_2 (e^{eta_2} - 1) (bounded below by -lambda_2).
inline double phi1(double eta1, double lambda1) {
  return -std::expm1(-detail::clamp_eta(eta1)) / lambda1;
}
inline double phi2(double eta2, double lambda2) {
  return lambda2 * std::expm1(detail::clamp_eta(eta2));
}
inline Eta phi(const Eta& eta, const ReducedModel& m) {
  return {phi1(eta[0], m.lambda1), phi2(eta[1], m.lambda2)};
}

/// Antiderivatives of phi_i vanishing at 0: the Volterra-type potentials.
inline double big_phi1(double eta1, double lambda1) {
  const double e = detail::clamp_eta(eta1);
  return (std::expm1(-e) + e) / lambda1;
}
inline double big_phi2(double eta2, double lambda2) {
  const double e = detail::clamp_eta(eta2);
  return lambda2 * (std::expm1(e) - e);
}
inline Eta big_phi(const Eta& eta, const ReducedModel& m) {
  return {big_phi1(eta[0], m.lambda1), big_phi2(eta[1], m.lambda2)};
}

/// Gains of the CLF gradient law (control A).
struct GainsA {
  double eps = 0.2;
  double beta = 0.6;

  /// Smallest admissible beta for the given eps: eps / (4 (1 + eps)).
  static double beta_min(double eps) { return eps / (4.0 * (1.0 + eps)); }

  void validate() const {
    if (!(eps > 0.0)) {
      throw ConfigError("control A: gain eps must satisfy eps > 0, got " + std::to_string(eps));
    }
    if (!(beta > beta_min(eps))) {
      std::ostringstream msg;
      msg << "control A: gain beta must satisfy beta > eps/(4(1+eps)) = " << beta_min(eps)
          << " for eps = " << eps << ", got beta = " << beta;
      throw ConfigError(msg.str());
    }
  }
};

/// Gains of the saturated positive law (control B).
struct GainsB {
  double eps = 0.01;
  double beta = 0.13;
  double delta = 0.2;

  void validate(const ReducedModel& m) const {
    std::ostringstream msg;
    if (!(eps > 0.0)) {
      msg << "control B: gain eps must satisfy eps > 0, got " << eps;
    } else if (!(beta >= 0.0)) {
      msg << "control B: gain beta must satisfy beta >= 0, got " << beta;
    } else if (!(delta > 0.0)) {
      msg << "control B: delta must satisfy delta > 0, got " << delta;
    } else if (!(eps * m.lambda2 + beta < m.u_star)) {
      msg << "control B: gains must satisfy eps*lambda_2 + beta < u* (" << eps << "*"
          << m.lambda2 << " + " << beta << " = " << eps * m.lambda2 + beta << " >= " << m.u_star
          << ")";
    } else {
      return;
    }
    throw ConfigError(msg.str());
  }

  /// Guaranteed lower bound of the control: u* - eps lambda_2 - beta.
  double lower_bound(const ReducedModel& m) const { return m.u_star - eps * m.lambda2 - beta; }
};

/// varphi = phi_1 + (1 + eps) phi_2, the common direction of both laws.
inline double varphi(const Eta& eta, double eps, const ReducedModel& m) {
  const Eta p = phi(eta, m);
  return p[0] + (1.0 + eps) * p[1];
}

/// Control A: u = u* + beta (phi_1 + (1 + eps) phi_2). May be negative.
inline double control_A(const Eta& eta, const GainsA& g, const ReducedModel& m) {
  return m.u_star + g.beta * varphi(eta, g.eps, m);
}

/// Control B: u = u* + eps phi_2 + beta varphi / sqrt(delta^2 + min(0, varphi)^2).
inline double control_B(const Eta& eta, const GainsB& g, const ReducedModel& m) {
  const double vp = varphi(eta, g.eps, m);
  const double neg = std::min(0.0, vp);
  return m.u_star + g.eps * phi2(eta[1], m.lambda2) +
         g.beta * vp / std::sqrt(g.delta * g.delta + neg * neg);
}

/// Feedback-linearizing law giving y' = z, z' = -k1 y - k2 z with
/// y = eta_1 - eta_2 and z = -(phi_1 + phi_2) on the reduced model.
inline double control_fblin(const Eta& eta, double k1, double k2, const ReducedModel& m) {
  const double e1 = detail::clamp_eta(eta[0]);
  const double e2 = detail::clamp_eta(eta[1]);
  const double p1 = phi1(e1, m.lambda1);
  const double p2 = phi2(e2, m.lambda2);
  const double up = m.lambda2 * std::exp(e2);
  const double down = std::exp(-e1) / m.lambda1;
  return m.u_star + (-k1 * (e1 - e2) + k2 * (p1 + p2) + up * p1 - down * p2) / (up + down);
}

/// Control A evaluated directly on population profiles (eta from the Pi functionals).
inline double control_in_x(const PopulationState& state, const std::array<AdjointData, 2>& adj,
                           const Equilibrium& eq, const GainsA& g) {
  const Eta eta{std::log(pi_functional(state.x[0], adj[0], eq.grid)),
                std::log(pi_functional(state.x[1], adj[1], eq.grid))};
  return control_A(eta, g, reduced(eq));
}

/// Sensor kernels y_i = int c_i x_i and their equilibrium outputs.
struct SensorSpec {
  std::array<GridFn, 2> c;
  std::array<double, 2> y_star{};
};

inline SensorSpec sensor_equilibrium(const GridFn& c1, const GridFn& c2, const KernelSet& ks,
                                     const Equilibrium& eq,
                                     double tol = kDefaultEquilibriumTolerance) {
  const AgeGrid& grid = eq.grid;
  SensorSpec s{{c1, c2}, {}};
  for (std::size_t i = 0; i < 2; ++i) {
    require_on_grid(s.c[i], grid, "sensor kernel");
    if (s.c[i].min() < 0.0) throw ConfigError("sensor kernel c_" + std::to_string(i + 1) + " must be nonnegative");
    if (!(quad(s.c[i], grid) > 0.0)) {
      throw ConfigError("sensor kernel c_" + std::to_string(i + 1) + " must have positive integral");
    }
  }
  if (!(eq.u_star > 0.0 && eq.u_star < eq.max_u_star())) throw ConfigError("sensor_equilibrium: infeasible u*");
  const double z1 = eq.zeta[kPrey], z2 = eq.zeta[kPredator], u = eq.u_star;
  s.y_star[kPrey] = (1.0 / (z2 - u)) * quad_product(c1, eq.xtilde[kPrey], grid) /
                    quad_product(ks[kPredator].g, eq.xtilde[kPrey], grid);
  s.y_star[kPredator] = (z1 - u) * quad_product(c2, eq.xtilde[kPredator], grid) /
                        quad_product(ks[kPrey].g, eq.xtilde[kPredator], grid);
  for (std::size_t i = 0; i < 2; ++i) {
    const double direct = quad_product(s.c[i], eq.x_star[i], grid);
    if (std::abs(direct - s.y_star[i]) > tol * std::max(1.0, std::abs(direct))) {
      throw NumericalError("sensor_equilibrium: closed form and direct y* disagree for species " +
                           std::to_string(i + 1));
    }
  }
  return s;
}

inline std::array<double, 2> measure(const PopulationState& state, const SensorSpec& s,
                                     const AgeGrid& grid) {
  return {quad_product(s.c[0], state.x[0], grid), quad_product(s.c[1], state.x[1], grid)};
}

/// Output-feedback approximation of control A using e^{eta_i} ~ y_i / y_i*.
inline double control_measured(const std::array<double, 2>& y, const SensorSpec& s,
                               const GainsA& g, const ReducedModel& m) {
  if (!(y[0] > 0.0) || !(y[1] > 0.0)) {
    throw NumericalError("control_measured: measurements must be positive");
  }
  return m.u_star + g.beta * ((1.0 / m.lambda1) * (1.0 - s.y_star[0] / y[0]) -
                              (1.0 + g.eps) * m.lambda2 * (1.0 - y[1] / s.y_star[1]));
}

// Tagged controller choice used by the simulators and the CLI.
struct OpenLoop {};
struct ControlA {
  GainsA gains;
};
struct ControlB {
  GainsB gains;
};
struct FeedbackLinearizing {
  double k1 = 1.0;
  double k2 = 2.0;
};
struct MeasuredA {
  GainsA gains;
  SensorSpec sensors;
};

using ControllerSpec = std::variant<OpenLoop, ControlA, ControlB, FeedbackLinearizing, MeasuredA>;

inline std::string controller_name(const ControllerSpec& spec) {
  struct {
    std::string operator()(const OpenLoop&) const { return "open_loop"; }
    std::string operator()(const ControlA&) const { return "A"; }
    std::string operator()(const ControlB&) const { return "B"; }
    std::string operator()(const FeedbackLinearizing&) const { return "fblin"; }
    std::string operator()(const MeasuredA&) const { return "measured"; }
  } v;
  return std::visit(v, spec);
}

/// Weight eps of the CLF V1 associated with the controller (0 when none).
inline double controller_eps(const ControllerSpec& spec) {
  if (const auto* a = std::get_if<ControlA>(&spec)) return a->gains.eps;
  if (const auto* b = std::get_if<ControlB>(&spec)) return b->gains.eps;
  if (const auto* m = std::get_if<MeasuredA>(&spec)) return m->gains.eps;
  return 0.0;
}

inline bool needs_measurement(const ControllerSpec& spec) {
  return std::holds_alternative<MeasuredA>(spec);
}

inline void validate_controller(const ControllerSpec& spec, const ReducedModel& m) {
  if (const auto* a = std::get_if<ControlA>(&spec)) a->gains.validate();
  if (const auto* b = std::get_if<ControlB>(&spec)) b->gains.validate(m);
  if (const auto* f = std::get_if<FeedbackLinearizing>(&spec)) {
    if (!(f->k1 > 0.0) || !(f->k2 > 0.0)) throw ConfigError("fblin: gains k1, k2 must be positive");
  }
  if (const auto* ma = std::get_if<MeasuredA>(&spec)) ma->gains.validate();
}

/// Evaluates the dilution for the current transformed state; y is used only
/// by the measurement-based law.
inline double evaluate_controller(const ControllerSpec& spec, const Eta& eta,
                                  const std::array<double, 2>& y, const ReducedModel& m) {
  struct {
    const Eta& eta;
    const std::array<double, 2>& y;
    const ReducedModel& m;
    double operator()(const OpenLoop&) const { return m.u_star; }
    double operator()(const ControlA& c) const { return control_A(eta, c.gains, m); }
    double operator()(const ControlB& c) const { return control_B(eta, c.gains, m); }
    double operator()(const FeedbackLinearizing& c) const { return control_fblin(eta, c.k1, c.k2, m); }
    double operator()(const MeasuredA& c) const { return control_measured(y, c.sensors, c.gains, m); }
  } v{eta, y, m};
  return std::visit(v, spec);
}

}  // namespace agepop
