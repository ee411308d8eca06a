#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "agepop/controllers.hpp"
#include "agepop/lyapunov.hpp"
#include "agepop/simulate.hpp"

using namespace agepop;

namespace {

const AgeGrid kGrid(1.0, 400);

struct Controllers : ::testing::Test {
  Scenario sc = prepare_scenario(build_kernels({}, {}, kGrid), 0.15, kGrid);
  ReducedModel m = sc.model;
  GainsA ga{0.2, 0.6};
  GainsB gb{0.01, 0.13, 0.2};
};

TEST_F(Controllers, PhiValues) {
  EXPECT_EQ(phi({0.0, 0.0}, m)[0], 0.0);
  EXPECT_EQ(phi({0.0, 0.0}, m)[1], 0.0);
  EXPECT_NEAR(phi2(-1.41, 1.02), -0.7710, 1e-4);
  EXPECT_NEAR(phi1(20.0, 0.98), 1.0 / 0.98, 1e-8);
}

TEST_F(Controllers, BigPhiValues) {
  EXPECT_EQ(big_phi({0.0, 0.0}, m)[0], 0.0);
  EXPECT_NEAR(big_phi1(1.0, 0.98), std::exp(-1.0) / 0.98, 1e-12);
  EXPECT_NEAR(big_phi1(1.0, 0.98), 0.375387, 1e-6);
  EXPECT_NEAR(big_phi2(1.0, 1.02), 1.02 * (std::exp(1.0) - 2.0), 1e-12);
  EXPECT_NEAR(big_phi2(1.0, 1.02), 0.732647, 1e-6);
}

TEST_F(Controllers, BigPhiIsAntiderivativeOfPhi) {
  const double h = 1e-5;
  for (double e : {-2.0, -0.3, 0.4, 1.7}) {
    EXPECT_NEAR((big_phi1(e + h, m.lambda1) - big_phi1(e - h, m.lambda1)) / (2 * h), phi1(e, m.lambda1), 1e-8);
    EXPECT_NEAR((big_phi2(e + h, m.lambda2) - big_phi2(e - h, m.lambda2)) / (2 * h), phi2(e, m.lambda2), 1e-8);
  }
}

TEST_F(Controllers, ControlAValues) {
  EXPECT_DOUBLE_EQ(control_A({0.0, 0.0}, ga, m), 0.15);
  EXPECT_NEAR(control_A({1.57, -1.41}, ga, m), 0.080, 2e-3);
  EXPECT_NEAR(control_A({-1.41, 1.57}, ga, m), 1.050, 2e-3);
}

TEST_F(Controllers, GainsAConstraintEchoesBound) {
  EXPECT_NEAR(GainsA::beta_min(0.2), 0.0416667, 1e-7);
  try {
    GainsA{0.2, 0.01}.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("0.0416667"), std::string::npos) << e.what();
  }
  EXPECT_THROW(GainsA({0.0, 0.6}).validate(), ConfigError);
}

TEST_F(Controllers, ControlBValues) {
  EXPECT_DOUBLE_EQ(control_B({0.0, 0.0}, gb, m), 0.15);
  EXPECT_NEAR(gb.lower_bound(m), 0.0098, 1e-4);
  EXPECT_NEAR(phi1(1.0, m.lambda1), 0.6451, 1e-3);
  EXPECT_NEAR(control_B({1.0, 0.0}, gb, m), 0.5693, 1e-3);
}

TEST_F(Controllers, ControlBStaysAboveLowerBound) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-12.0, 12.0);
  for (int k = 0; k < 2000; ++k) {
    const Eta e{d(rng), d(rng)};
    EXPECT_GT(control_B(e, gb, m), gb.lower_bound(m)) << e[0] << ", " << e[1];
  }
}

TEST_F(Controllers, GainsBConstraint) {
  EXPECT_NO_THROW(gb.validate(m));
  EXPECT_THROW(GainsB({0.2, 0.6, 0.2}).validate(m), ConfigError);
  EXPECT_THROW(GainsB({0.01, 0.13, 0.0}).validate(m), ConfigError);
}

TEST_F(Controllers, FeedbackLinearizingAtOrigin) {
  EXPECT_DOUBLE_EQ(control_fblin({0.0, 0.0}, 1.0, 2.0, m), 0.15);
}

TEST_F(Controllers, FeedbackLinearizingArithmetic) {
  // Second implementation: solve z' = -k1 y - k2 z for u on the reduced model.
  const double e1 = 0.1, e2 = 0.1, k1 = 1.0, k2 = 2.0;
  const double p1 = (1.0 - std::exp(-e1)) / m.lambda1, p2 = m.lambda2 * (std::exp(e2) - 1.0);
  const double y = e1 - e2, z = -(p1 + p2);
  // z' = -(e^{-e1}/l1) (w - p2) - l2 e^{e2} (w + p1) with w = u* - u.
  const double a = std::exp(-e1) / m.lambda1, b = m.lambda2 * std::exp(e2);
  const double w = (k1 * y + k2 * z + a * p2 - b * p1) / (a + b);
  EXPECT_NEAR(control_fblin({e1, e2}, k1, k2, m), m.u_star - w, 1e-14);
}

TEST_F(Controllers, FeedbackLinearizingClosedLoopIsLinear) {
  // RK4 on the reduced model vs the closed-form solution of y'' + k2 y' + k1 y = 0.
  const double k1 = 1.0, k2 = 2.0, dt = 1e-3;
  Eta e{0.5, -0.5};
  auto f = [&](const Eta& x) { return reduced_vector_field(x, control_fblin(x, k1, k2, m), m); };
  const double y0 = e[0] - e[1];
  const double z0 = -(phi1(e[0], m.lambda1) + phi2(e[1], m.lambda2));
  // Critically damped (k2^2 = 4 k1): y = (y0 + (z0 + y0) t) e^{-t}.
  double worst = 0.0;
  for (int s = 1; s <= 5000; ++s) {
    const Eta a = f(e);
    const Eta b = f({e[0] + 0.5 * dt * a[0], e[1] + 0.5 * dt * a[1]});
    const Eta c = f({e[0] + 0.5 * dt * b[0], e[1] + 0.5 * dt * b[1]});
    const Eta d = f({e[0] + dt * c[0], e[1] + dt * c[1]});
    for (int i = 0; i < 2; ++i) e[i] += dt / 6.0 * (a[i] + 2 * b[i] + 2 * c[i] + d[i]);
    const double t = s * dt;
    worst = std::max(worst, std::abs((e[0] - e[1]) - (y0 + (z0 + y0) * t) * std::exp(-t)));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST_F(Controllers, ControlInPopulationCoordinates) {
  EXPECT_NEAR(control_in_x({0.0, sc.eq.x_star}, sc.adj, sc.eq, ga), 0.15, 1e-6);
  const PopulationState fq = ic_from_spec(IcFourthQuadrant{}, sc.eq);
  const TransformedState ts = to_transformed(fq, sc.eq, sc.adj);
  EXPECT_NEAR(control_in_x(fq, sc.adj, sc.eq, ga), control_A(ts.eta, ga, m), 1e-6);
  const PopulationState twice{0.0, {2.0 * sc.eq.x_star[0], 2.0 * sc.eq.x_star[1]}};
  EXPECT_NEAR(control_in_x(twice, sc.adj, sc.eq, ga), control_A({std::log(2.0), std::log(2.0)}, ga, m), 1e-6);
}

TEST_F(Controllers, SensorEquilibriumClosedForms) {
  const SensorSpec pairing = sensor_equilibrium(sc.kernels[kPredator].g, sc.kernels[kPrey].g, sc.kernels, sc.eq);
  EXPECT_NEAR(pairing.y_star[0], m.lambda1, 1e-10);
  EXPECT_NEAR(pairing.y_star[0], 1.0 / (sc.eq.zeta[1] - sc.eq.u_star), 1e-10);
  const SensorSpec births = sensor_equilibrium(sc.kernels[kPrey].k, sc.kernels[kPredator].k, sc.kernels, sc.eq);
  EXPECT_NEAR(births.y_star[0] / sc.eq.x0_star[0], 1.0, 1e-8);
  EXPECT_NEAR(births.y_star[1] / sc.eq.x0_star[1], 1.0, 1e-8);
}

TEST_F(Controllers, SensorEquilibriumRandomKernelsAgree) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const GridFn c1 = GridFn::sample(kGrid, [&](double) { return d(rng); });
    const GridFn c2 = GridFn::sample(kGrid, [&](double) { return d(rng); });
    const SensorSpec s = sensor_equilibrium(c1, c2, sc.kernels, sc.eq);
    EXPECT_NEAR(s.y_star[0], quad_product(c1, sc.eq.x_star[0], kGrid), 1e-8 * s.y_star[0]);
    EXPECT_NEAR(s.y_star[1], quad_product(c2, sc.eq.x_star[1], kGrid), 1e-8 * s.y_star[1]);
  }
}

TEST_F(Controllers, MeasuredLaw) {
  const SensorSpec s = sensor_equilibrium(GridFn::constant(kGrid, 1.0), GridFn::constant(kGrid, 1.0), sc.kernels, sc.eq);
  EXPECT_NEAR(control_measured(s.y_star, s, ga, m), 0.15, 1e-14);
  // With psi = 0 the profiles are x* e^{eta}, so y_i / y_i* = e^{eta_i} exactly.
  const Eta eta{0.7, -0.4};
  const PopulationState x{0.0, {std::exp(eta[0]) * sc.eq.x_star[0], std::exp(eta[1]) * sc.eq.x_star[1]}};
  EXPECT_NEAR(control_measured(measure(x, s, kGrid), s, ga, m), control_A(eta, ga, m), 1e-9);
  EXPECT_NEAR(control_measured({1e300, s.y_star[1]}, s, ga, m), 0.15 + ga.beta / m.lambda1, 1e-12);
  EXPECT_THROW(control_measured({0.0, 1.0}, s, ga, m), NumericalError);
}

TEST_F(Controllers, EvaluateDispatch) {
  const Eta eta{0.3, -0.2};
  EXPECT_EQ(evaluate_controller(OpenLoop{}, eta, {}, m), m.u_star);
  EXPECT_EQ(evaluate_controller(ControlA{ga}, eta, {}, m), control_A(eta, ga, m));
  EXPECT_EQ(evaluate_controller(ControlB{gb}, eta, {}, m), control_B(eta, gb, m));
  EXPECT_EQ(controller_name(ControlB{gb}), "B");
  EXPECT_EQ(controller_eps(ControlA{ga}), 0.2);
  EXPECT_THROW(validate_controller(FeedbackLinearizing{0.0, 1.0}, m), ConfigError);
}

}  // namespace
