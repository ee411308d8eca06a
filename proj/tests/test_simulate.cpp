#include <cmath>

#include <gtest/gtest.h>

#include "agepop/simulate.hpp"

using namespace agepop;

namespace {

const AgeGrid kGrid(1.0, 400);

Scenario reference_scenario(const AgeGrid& grid = kGrid) {
  return prepare_scenario(build_kernels({}, {}, grid), 0.15, grid);
}

SimConfig base_config(const Scenario& sc, ControllerSpec c, IcSpec ic, double t_final) {
  SimConfig cfg;
  cfg.kernels = sc.kernels;
  cfg.u_star = sc.eq.u_star;
  cfg.grid = sc.eq.grid;
  cfg.controller = std::move(c);
  cfg.ic = std::move(ic);
  cfg.t_final = t_final;
  cfg.keep_snapshots = false;
  return cfg;
}

IcSpec eta_only(Eta eta, const AgeGrid& grid) {
  return IcTransformed{eta, {HistoryBuffer::zeros(grid), HistoryBuffer::zeros(grid)}};
}

double norm(const Eta& e) { return std::hypot(e[0], e[1]); }

struct Simulate : ::testing::Test {
  Scenario sc = reference_scenario();
};

TEST_F(Simulate, InitialConditions) {
  const PopulationState fq = ic_from_spec(IcFourthQuadrant{}, sc.eq);
  EXPECT_NEAR(fq.x[0][0], 91.9, 0.2);
  EXPECT_NEAR(fq.x[0][0], sc.eq.x0_star[0] * std::exp(1.0), 1e-12);
  const PopulationState one = ic_from_spec(IcMultipliers{{GridFn::constant(kGrid, 1.0), GridFn::constant(kGrid, 1.0)}}, sc.eq);
  for (std::size_t j = 0; j < kGrid.size(); ++j) EXPECT_EQ(one.x[1][j], sc.eq.x_star[1][j]);
  const TransformedState sq = to_transformed(ic_from_spec(IcSecondQuadrant{}, sc.eq), sc.eq, sc.adj);
  EXPECT_NEAR(sq.eta[0], -1.41, 0.01);
  EXPECT_NEAR(sq.eta[1], 1.57, 0.01);
  EXPECT_THROW(ic_from_spec(IcMultipliers{{GridFn::constant(kGrid, 1.0), GridFn::constant(kGrid, 0.0)}}, sc.eq),
               ConfigError);
}

TEST_F(Simulate, InteractionTerms) {
  const auto L = interaction_terms({0.0, sc.eq.x_star}, sc.kernels, kGrid);
  EXPECT_NEAR(L[0] / 1.02, 1.0, 0.01);
  EXPECT_NEAR(L[1] / 1.0204, 1.0, 0.01);
  EXPECT_NEAR(L[0], sc.eq.lambda[1], 1e-12);
  const auto none = interaction_terms({0.0, {sc.eq.x_star[0], GridFn::constant(kGrid, 0.0)}}, sc.kernels, kGrid);
  EXPECT_EQ(none[0], 0.0);
  const auto dbl = interaction_terms({0.0, {2.0 * sc.eq.x_star[0], sc.eq.x_star[1]}}, sc.kernels, kGrid);
  EXPECT_NEAR(dbl[1], 1.0 / (2.0 * sc.eq.lambda[0]), 1e-12);
  EXPECT_THROW(interaction_terms({0.0, {GridFn::constant(kGrid, 0.0), sc.eq.x_star[1]}}, sc.kernels, kGrid),
               NumericalError);
}

TEST_F(Simulate, EquilibriumIsFixedPointOfStep) {
  const PopulationState next = step_direct({0.0, sc.eq.x_star}, sc.eq.u_star, sc.kernels, kGrid, kGrid.step());
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < kGrid.size(); ++j) {
      EXPECT_LT(std::abs(next.x[i][j] / sc.eq.x_star[i][j] - 1.0), 1e-4);
    }
  }
}

TEST_F(Simulate, NoBirthsWithoutBirthKernel) {
  KernelSet ks = sc.kernels;
  for (auto& s : ks.species) s.k = GridFn::constant(kGrid, 0.0);
  const PopulationState next = step_direct({0.0, sc.eq.x_star}, 0.15, ks, kGrid, kGrid.step());
  EXPECT_EQ(next.x[0][0], 0.0);
  EXPECT_EQ(next.x[1][0], 0.0);
}

TEST_F(Simulate, PureTransport) {
  KernelSet ks = sc.kernels;
  for (auto& s : ks.species) s.mu = GridFn::constant(kGrid, 0.0);
  const PopulationState x = ic_from_spec(IcFourthQuadrant{}, sc.eq);
  const PopulationState next = transport_step(x, 0.0, {0.0, 0.0}, ks, kGrid, kGrid.step());
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 1; j < kGrid.size(); ++j) EXPECT_EQ(next.x[i][j], x.x[i][j - 1]);
  }
}

TEST_F(Simulate, StepRejectsUnlockedTimeStep) {
  EXPECT_THROW(step_direct({0.0, sc.eq.x_star}, 0.15, sc.kernels, kGrid, 0.5 * kGrid.step()), ConfigError);
  SimConfig cfg = base_config(sc, OpenLoop{}, IcEquilibrium{}, 1.0);
  cfg.dt = 0.01;
  EXPECT_THROW(cfg.n_steps(), ConfigError);
}

TEST_F(Simulate, RenewalHoldsAlongDirectTrajectory) {
  PopulationState x = ic_from_spec(IcFourthQuadrant{}, sc.eq);
  for (int s = 0; s < 50; ++s) {
    x = step_direct(x, 0.15, sc.kernels, kGrid, kGrid.step());
    for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(bc_residual(x.x[i], sc.kernels[i].k, kGrid) / x.x[i][0], 1e-3);
  }
}

TEST_F(Simulate, ControlAFourthQuadrantSettles) {
  const Trajectory t = simulate_direct(base_config(sc, ControlA{{0.2, 0.6}}, IcFourthQuadrant{}, 20.0), sc);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t.times[k] >= 10.0) {
      EXPECT_LE(norm(t.eta[k]), 0.05) << "t = " << t.times[k];
    }
    EXPECT_GT(t.u[k], 0.0);
  }
}

TEST_F(Simulate, ControlBSecondQuadrantPositiveAndSettled) {
  const Trajectory t = simulate_direct(base_config(sc, ControlB{{0.01, 0.13, 0.2}}, IcSecondQuadrant{}, 20.0), sc);
  EXPECT_GT(*std::min_element(t.u.begin(), t.u.end()), 0.0);
  EXPECT_LE(norm(t.eta.back()), 0.1);
}

TEST_F(Simulate, ControlASecondQuadrantGoesNegative) {
  const Trajectory t = simulate_transformed(base_config(sc, ControlA{{0.2, 0.6}}, IcSecondQuadrant{}, 20.0), sc);
  EXPECT_LT(*std::min_element(t.u.begin(), t.u.end()), 0.0);
}

TEST_F(Simulate, OpenLoopConservesV0WithZeroHistory) {
  const Trajectory t = simulate_transformed(base_config(sc, OpenLoop{}, eta_only({1.57, -1.41}, kGrid), 20.0), sc);
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_LT(std::abs(t.v0[k] / t.v0[0] - 1.0), 1e-3);
  EXPECT_EQ(t.psi_sup.back()[0], 0.0);
}

TEST_F(Simulate, ZeroHistoryStaysZeroAndOriginIsFixed) {
  TransformedState ts{0.0, {0.0, 0.0}, {HistoryBuffer::zeros(kGrid), HistoryBuffer::zeros(kGrid)}};
  for (int s = 0; s < 100; ++s) ts = step_transformed(ts, sc.eq.u_star, sc, kGrid.step(), Coupling::SecondOrder);
  EXPECT_EQ(ts.eta[0], 0.0);
  EXPECT_EQ(ts.eta[1], 0.0);
  EXPECT_EQ(ts.psi[0].sup_norm(), 0.0);
}

TEST(SimulateOrder, HeunIsSecondOrderOnReducedModel) {
  // Open loop with psi = 0: eta follows the reduced ODE of each grid's own
  // equilibrium (lambda_i shift with the grid at O(h^2)). Reference by fine RK4.
  const double T = 2.0;
  const Eta eta0{1.0, -0.5};
  auto reference = [&](const ReducedModel& m) {
    auto f = [&](const Eta& e) { return reduced_vector_field(e, m.u_star, m); };
    Eta ref = eta0;
    const int n_ref = 20000;
    const double h = T / n_ref;
    for (int s = 0; s < n_ref; ++s) {
      const Eta a = f(ref);
      const Eta b = f({ref[0] + 0.5 * h * a[0], ref[1] + 0.5 * h * a[1]});
      const Eta c = f({ref[0] + 0.5 * h * b[0], ref[1] + 0.5 * h * b[1]});
      const Eta d = f({ref[0] + h * c[0], ref[1] + h * c[1]});
      for (int i = 0; i < 2; ++i) ref[i] += h / 6.0 * (a[i] + 2 * b[i] + 2 * c[i] + d[i]);
    }
    return ref;
  };
  auto error = [&](int n_cells) {
    const Scenario s = reference_scenario(AgeGrid(1.0, n_cells));
    const Trajectory t = simulate_transformed(base_config(s, OpenLoop{}, eta_only(eta0, s.eq.grid), T), s);
    const Eta ref = reference(s.model);
    return norm({t.eta.back()[0] - ref[0], t.eta.back()[1] - ref[1]});
  };
  const double e1 = error(100), e2 = error(200);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4) << e1 << " " << e2;
}

TEST_F(Simulate, HistoryFollowsRenewalEquation) {
  TransformedState ts = to_transformed(ic_from_spec(IcFourthQuadrant{}, sc.eq), sc.eq, sc.adj);
  const double sup0 = std::max(ts.psi[0].sup_norm(), ts.psi[1].sup_norm());
  const int steps_to_5 = static_cast<int>(std::lround(5.0 / kGrid.step()));
  const int steps_to_A = static_cast<int>(std::lround(1.0 / kGrid.step()));
  for (int s = 1; s <= steps_to_5; ++s) {
    ts = step_transformed(ts, sc.eq.u_star, sc, kGrid.step());
    if (s >= steps_to_A && s % 40 == 0) {
      for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_LT(check_S(ts.psi[i], sc.eq.ktilde[i], kGrid).second, 1e-8) << "step " << s;
      }
    }
  }
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(ts.psi[i].sup_norm(), sup0);
}

TEST(CrossValidate, OpenLoopAgreementAndConvergence) {
  auto discrepancy = [](int n_cells) {
    const Scenario sc = reference_scenario(AgeGrid(1.0, n_cells));
    SimConfig cfg = base_config(sc, OpenLoop{}, IcFourthQuadrant{}, 10.0);
    cfg.record_every = n_cells / 10;
    return cross_validate(cfg);
  };
  const double d200 = discrepancy(200), d400 = discrepancy(400);
  EXPECT_LT(d200, 1e-2);
  EXPECT_LT(d400, d200);
}

TEST_F(Simulate, CrossValidateAtEquilibrium) {
  EXPECT_LT(cross_validate(base_config(sc, OpenLoop{}, IcEquilibrium{}, 5.0)), 1e-6);
}

TEST_F(Simulate, Deterministic) {
  const SimConfig cfg = base_config(sc, ControlB{{0.01, 0.13, 0.2}}, IcFourthQuadrant{}, 3.0);
  const Trajectory a = simulate_direct(cfg, sc), b = simulate_direct(cfg, sc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.eta[k], b.eta[k]);
    EXPECT_EQ(a.u[k], b.u[k]);
  }
}

TEST_F(Simulate, SnapshotsFollowStride) {
  SimConfig cfg = base_config(sc, OpenLoop{}, IcFourthQuadrant{}, 1.0);
  cfg.keep_snapshots = true;
  cfg.record_every = 100;
  const Trajectory t = simulate_direct(cfg, sc);
  EXPECT_EQ(t.size(), 401u);
  ASSERT_EQ(t.snapshots.size(), 5u);
  EXPECT_DOUBLE_EQ(t.snapshots[1].t, 0.25);
}

}  // namespace
