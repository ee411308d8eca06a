#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "agepop/lyapunov.hpp"
#include "agepop/simulate.hpp"

using namespace agepop;

namespace {

const AgeGrid kGrid(1.0, 400);
const ReducedModel kRounded{0.15, 0.98, 1.02};

struct Lyapunov : ::testing::Test {
  Scenario sc = prepare_scenario(build_kernels({}, {}, kGrid), 0.15, kGrid);
  ReducedModel m = sc.model;
  std::array<SigmaResult, 2> sig{find_sigma(sc.eq.ktilde[0], kGrid), find_sigma(sc.eq.ktilde[1], kGrid)};
  LyapConfig cfg_a = lyap_config_for_A({0.2, 0.6}, m, sig);
  LyapConfig cfg_b = lyap_config_for_B({0.01, 0.13, 0.2}, m, sig);

  HistoryBuffer random_history(std::mt19937& rng, double amp) const {
    std::uniform_real_distribution<double> d(-amp, amp);
    std::vector<double> v(kGrid.size());
    for (double& x : v) x = d(rng);
    return HistoryBuffer(std::move(v), 1.0);
  }
};

TEST(V, OracleValues) {
  EXPECT_EQ(v0({0.0, 0.0}, kRounded), 0.0);
  EXPECT_NEAR(v0({1.0, 1.0}, kRounded), 1.108035, 1e-6);
  EXPECT_EQ(v1({0.0, 0.0}, 0.2, kRounded), 0.0);
  EXPECT_NEAR(v1({1.0, 1.0}, 0.2, kRounded), 1.254564, 1e-6);
  EXPECT_EQ(v1({0.4, -1.3}, 0.0, kRounded), v0({0.4, -1.3}, kRounded));
}

TEST(Q, WorkedExample) {
  const Mat2 q = q_matrix(0.2, 0.6);
  EXPECT_NEAR(q.a11, 0.6, 1e-15);
  EXPECT_NEAR(q.a12, -0.62, 1e-15);
  EXPECT_NEAR(q.a21, -0.62, 1e-15);
  EXPECT_NEAR(q.a22, 0.864, 1e-15);
  EXPECT_NEAR(lambda_min_q(0.2, 0.6), 0.0981, 1e-4);
}

TEST(Q, ClosedFormMatchesEigenSolve) {
  for (double eps : {0.01, 0.1, 0.2, 0.5, 1.0, 3.0}) {
    for (double f : {1.01, 1.5, 2.0, 5.0, 20.0, 100.0}) {
      const double beta = f * GainsA::beta_min(eps);
      EXPECT_NEAR(lambda_min_q(eps, beta), lambda_min_q_eig(eps, beta), 1e-12) << eps << " " << beta;
    }
  }
}

TEST(Q, DerivativeIdentityUnderControlA) {
  // V1' = -phi^T Q' phi along the reduced model with control A.
  const GainsA g{0.2, 0.6};
  const Mat2 q = q_matrix_derivative(g.eps, g.beta);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Eta eta{d(rng), d(rng)};
    const Eta p = phi(eta, kRounded);
    const Eta f = reduced_vector_field(eta, control_A(eta, g, kRounded), kRounded);
    const double vdot = p[0] * f[0] + (1.0 + g.eps) * p[1] * f[1];
    const double quad_form = q.a11 * p[0] * p[0] + 2.0 * q.a12 * p[0] * p[1] + q.a22 * p[1] * p[1];
    EXPECT_NEAR(vdot, -quad_form, 1e-12);
  }
}

TEST(Q, InvalidGainsRejected) { EXPECT_THROW(lambda_min_q(0.2, 0.01), ConfigError); }

TEST(H, Values) {
  EXPECT_EQ(h_fn(0.0), 0.0);
  EXPECT_EQ(detail::h_integrand(0.0), 0.0);
  EXPECT_LT(std::abs(detail::h_integrand(1e-8)), 1e-7);
  EXPECT_NEAR(h_fn(1.0), 1.048, 2e-3);
  EXPECT_THROW(h_fn(-0.1), ConfigError);
}

TEST(H, MatchesFineCompositeSimpson) {
  for (double p : {0.3, 1.0, 4.0, 15.0}) {
    const int n = 20000;
    const double h = p / n;
    double s = detail::h_integrand(0.0) + detail::h_integrand(p);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * detail::h_integrand(i * h);
    s *= h / 3.0;
    EXPECT_NEAR(h_fn(p) / s, 1.0, 1e-8) << p;
  }
}

TEST(G, ConstantHistories) {
  const double sigma = 0.7;
  EXPECT_EQ(g_fn(HistoryBuffer::zeros(kGrid), sigma, kGrid), 0.0);
  const HistoryBuffer pos(std::vector<double>(kGrid.size(), 0.3), 1.0);
  EXPECT_NEAR(g_fn(pos, sigma, kGrid), 0.3 * std::exp(sigma), 1e-14);
  const HistoryBuffer neg(std::vector<double>(kGrid.size(), -0.4), 1.0);
  EXPECT_NEAR(g_fn(neg, sigma, kGrid), 0.4 * std::exp(sigma) / 0.6, 1e-14);
}

TEST_F(Lyapunov, VBoundedByG) {
  std::mt19937 rng(42);
  for (int k = 0; k < 100; ++k) {
    const HistoryBuffer psi = random_history(rng, 0.9);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_LE(std::abs(v_map(psi, sc.gbar[1 - i], kGrid)), g_fn(psi, cfg_a.sigma[i], kGrid));
    }
  }
}

TEST_F(Lyapunov, FindSigmaPostconditions) {
  for (const SigmaResult& s : sig) {
    EXPECT_LT(s.j_min, 1.0);
    EXPECT_GT(s.sigma, 0.0);
    EXPECT_GT(s.kappa, 0.0);
    EXPECT_GE(s.weighted_at_sigma, 1.0 - 1e-6);
    EXPECT_LT(s.weighted_at_sigma, 1.0);
  }
  EXPECT_NEAR(cfg_a.sigma[0], kSigmaSafety * sig[0].sigma, 1e-15);
}

TEST_F(Lyapunov, FullFunctional) {
  const HistoryBuffer z = HistoryBuffer::zeros(kGrid);
  EXPECT_EQ(v_full({0.0, 0.0}, z, z, cfg_a, m, kGrid), 0.0);
  EXPECT_EQ(v_full({0.3, -0.2}, z, z, cfg_a, m, kGrid), v1({0.3, -0.2}, 0.2, m));
  std::mt19937 rng(5);
  for (int k = 0; k < 20; ++k) {
    const HistoryBuffer p1 = random_history(rng, 0.2), p2 = random_history(rng, 0.2);
    const Eta eta{0.1, 0.4};
    const double extra = cfg_a.gamma[0] / cfg_a.sigma[0] * h_fn(g_fn(p1, cfg_a.sigma[0], kGrid)) +
                         cfg_a.gamma[1] / cfg_a.sigma[1] * h_fn(g_fn(p2, cfg_a.sigma[1], kGrid));
    EXPECT_NEAR(v_full(eta, p1, p2, cfg_a, m, kGrid) - v1(eta, 0.2, m), extra, 1e-12 * (1.0 + extra));
  }
}

TEST_F(Lyapunov, RegionDContainsOriginAndGammaBoundIsStrict) {
  EXPECT_TRUE(region_D({0.0, 0.0}, cfg_a, m));
  EXPECT_THROW(region_Dbar({0.0, 0.0}, cfg_a, m), ConfigError);
  LyapConfig edge = cfg_a;
  edge.gamma[0] = gamma_circ(0.2, 0.6) / (m.lambda1 * m.lambda1);
  EXPECT_NEAR(bounds_H(edge, m)[0], 0.0, 1e-14);
  EXPECT_THROW(edge.validate(m), ConfigError);
}

TEST_F(Lyapunov, PositivityCurvePassesBelowOrigin) {
  const auto e2 = third_boundary_eta2(0.0, cfg_a, m);
  ASSERT_TRUE(e2.has_value());
  EXPECT_LT(*e2, 0.0);
  EXPECT_NEAR(control_A({0.0, *e2}, {0.2, 0.6}, m), 0.0, 1e-12);
  const auto e1 = third_boundary_eta1(*e2, cfg_a, m);
  ASSERT_TRUE(e1.has_value());
  EXPECT_NEAR(*e1, 0.0, 1e-12);
}

TEST_F(Lyapunov, RegionDbar) {
  EXPECT_TRUE(region_Dbar({0.0, 0.0}, cfg_b, m));
  LyapConfig tight = cfg_b;
  tight.varpi = cfg_b.beta / cfg_b.delta * (1.0 - 1e-12);
  EXPECT_LT(varphi_level(tight, m), 1e-5);
  // Hyperbola at q_1 = 0 versus the varphi form of the same boundary.
  const double level = varphi_level(cfg_b, m);
  const double by_formula = -level * m.lambda1 / ((1.0 + cfg_b.eps) * m.lambda1 * m.lambda2);
  EXPECT_NEAR(hyperbola_H(0.0, cfg_b, m), by_formula, 1e-10);
  EXPECT_NEAR(std::expm1(*third_boundary_eta2(0.0, cfg_b, m)), hyperbola_H(0.0, cfg_b, m), 1e-10);
}

TEST_F(Lyapunov, LyapConfigValidation) {
  LyapConfig c = cfg_b;
  c.varpi = c.beta / c.delta * 1.01;
  EXPECT_THROW(c.validate(m), ConfigError);
  c = cfg_a;
  c.sigma[1] = 0.0;
  EXPECT_THROW(c.validate(m), ConfigError);
}

TEST_F(Lyapunov, ReducedDecreaseUnderControlA) {
  SimConfig s;
  s.kernels = sc.kernels;
  s.grid = kGrid;
  s.t_final = 10.0;
  s.controller = ControlA{{0.2, 0.6}};
  s.ic = IcTransformed{{0.8, -0.6}, {HistoryBuffer::zeros(kGrid), HistoryBuffer::zeros(kGrid)}};
  s.keep_snapshots = false;
  const Trajectory t = simulate_transformed(s, sc);
  EXPECT_LE(dini_check(t, cfg_a, m, DiniBound::ReducedA).max_violation, 0.0);
}

TEST_F(Lyapunov, OpenLoopConservation) {
  SimConfig s;
  s.kernels = sc.kernels;
  s.grid = kGrid;
  s.t_final = 10.0;
  s.ic = IcTransformed{{1.57, -1.41}, {HistoryBuffer::zeros(kGrid), HistoryBuffer::zeros(kGrid)}};
  s.keep_snapshots = false;
  const Trajectory t = simulate_transformed(s, sc);
  EXPECT_LT(dini_check(t, cfg_a, m, DiniBound::Conservation).max_violation, 1e-3);
}

// New boundary samples enter G at full weight e^{sigma A}, so a decrease at
// rate sigma on every single step is not implied; what holds is that G does
// not grow step to step for small sigma, and decays by e^{-sigma A} over each
// generation at the configured sigma.
Trajectory fq_with_lyap(const Scenario& sc, const LyapConfig& lc) {
  SimConfig s;
  s.kernels = sc.kernels;
  s.grid = kGrid;
  s.t_final = 6.0;
  s.controller = ControlA{{0.2, 0.6}};
  s.ic = IcFourthQuadrant{};
  s.keep_snapshots = false;
  s.lyap = lc;
  return simulate_transformed(s, sc);
}

TEST_F(Lyapunov, GIsNonincreasingForSmallSigma) {
  LyapConfig small = cfg_a;
  small.sigma = {0.01, 0.01};
  const Trajectory t = fq_with_lyap(sc, small);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    ASSERT_LE(t.g1[k + 1], t.g1[k] * (1.0 + 1e-9) + 1e-14) << "t = " << t.times[k];
    ASSERT_LE(t.g2[k + 1], t.g2[k] * (1.0 + 1e-9) + 1e-14) << "t = " << t.times[k];
  }
}

TEST_F(Lyapunov, GDecaysAtSigmaPerGeneration) {
  const Trajectory t = fq_with_lyap(sc, cfg_a);
  const std::size_t per_gen = kGrid.size() - 1;  // dt = da
  std::size_t checked = 0;
  for (std::size_t k = 0; k + per_gen < t.size(); ++k) {
    if (t.g1[k] < 1e-9 || t.g2[k] < 1e-9) break;  // roundoff floor
    EXPECT_LE(t.g1[k + per_gen], std::exp(-cfg_a.sigma[0]) * t.g1[k] * (1.0 + 1e-12)) << "t = " << t.times[k];
    EXPECT_LE(t.g2[k + per_gen], std::exp(-cfg_a.sigma[1]) * t.g2[k] * (1.0 + 1e-12)) << "t = " << t.times[k];
    ++checked;
  }
  EXPECT_GT(checked, per_gen);
}

TEST_F(Lyapunov, ClosedLoopJacobians) {
  const GainsA ga{0.2, 0.6};
  const Mat2 ja = closed_loop_jacobian_A(ga, m);
  const Mat2 fa = finite_difference_jacobian([&](const Eta& e) { return control_A(e, ga, m); }, m);
  EXPECT_NEAR(ja.a11, fa.a11, 1e-6);
  EXPECT_NEAR(ja.a12, fa.a12, 1e-6);
  EXPECT_NEAR(ja.a21, fa.a21, 1e-6);
  EXPECT_NEAR(ja.a22, fa.a22, 1e-6);
  EXPECT_TRUE(is_hurwitz(ja));

  const GainsB gb{0.01, 0.13, 0.2};
  const Mat2 jb = closed_loop_jacobian_B(gb, m);
  const Mat2 fb = finite_difference_jacobian([&](const Eta& e) { return control_B(e, gb, m); }, m);
  EXPECT_NEAR(jb.a11, fb.a11, 1e-6);
  EXPECT_NEAR(jb.a12, fb.a12, 1e-6);
  EXPECT_NEAR(jb.a21, fb.a21, 1e-6);
  EXPECT_NEAR(jb.a22, fb.a22, 1e-6);
  for (const auto& ev : eigenvalues(jb)) EXPECT_LT(ev.real(), 0.0);
}

TEST_F(Lyapunov, ControlBWithoutSaturatedTerm) {
  const Mat2 j = closed_loop_jacobian_B({0.01, 0.0, 0.2}, m);
  EXPECT_NEAR(j.a11, 0.0, 1e-15);
  EXPECT_NEAR(j.a12, -(1.01) * m.lambda2, 1e-15);
  EXPECT_NEAR(j.a21, 1.0 / m.lambda1, 1e-15);
  EXPECT_NEAR(j.a22, -0.01 * m.lambda2, 1e-15);
  EXPECT_TRUE(is_hurwitz(j));
}

TEST_F(Lyapunov, ControlBSmallDeltaIsOverdamped) {
  const GainsB g{0.01, 0.13, 0.01};
  EXPECT_GT(damping_discriminant(g, m), 0.0);
  for (const auto& ev : eigenvalues(closed_loop_jacobian_B(g, m))) {
    EXPECT_EQ(ev.imag(), 0.0);
    EXPECT_LT(ev.real(), 0.0);
  }
}

}  // namespace
