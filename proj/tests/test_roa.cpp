#include <cmath>

#include <gtest/gtest.h>

#include "agepop/roa.hpp"
#include "agepop/simulate.hpp"

using namespace agepop;

namespace {

const AgeGrid kGrid(1.0, 400);

struct Roa : ::testing::Test {
  Scenario sc = prepare_scenario(build_kernels({}, {}, kGrid), 0.15, kGrid);
  ReducedModel m = sc.model;
  std::array<SigmaResult, 2> sig{find_sigma(sc.eq.ktilde[0], kGrid), find_sigma(sc.eq.ktilde[1], kGrid)};
};

TEST_F(Roa, ArgminAttainsLevelAndSublevelSetIsInside) {
  const LyapConfig c = lyap_config_for_A({0.2, 0.6}, m, sig);
  const RoaEstimate est = roa_estimate(c, m);
  EXPECT_GT(est.c_star, 0.0);
  EXPECT_NEAR(v1(est.argmin, c.eps, m), est.c_star, 1e-12);
  const MembershipReport rep = roa_membership_check(est.c_star, c, m, 400);
  EXPECT_GT(rep.inside_level, 1000u);
  EXPECT_EQ(rep.violations, 0u);
}

TEST_F(Roa, LevelIsMonotoneInGamma) {
  double prev = 0.0;
  for (double f : {1.2, 2.0, 5.0, 50.0}) {
    const double c = roa_estimate(lyap_config_for_A({0.2, 0.6}, m, sig, f), m).c_star;
    EXPECT_GE(c, prev - 1e-12) << f;
    prev = c;
  }
}

TEST_F(Roa, PositivityCurveActiveForLargeGamma) {
  const RoaEstimate est = roa_estimate(lyap_config_for_A({0.2, 0.6}, m, sig, 50.0), m);
  EXPECT_EQ(est.active, "u_zero");
  double h_min = std::numeric_limits<double>::infinity();
  for (const auto& p : est.pieces) {
    if (p.label == "H1" || p.label == "H2") {
      for (double v : p.v1) h_min = std::min(h_min, v);
    }
  }
  EXPECT_GT(h_min, est.c_star);
}

TEST_F(Roa, DbarBoundaryIncludesHyperbolaPiece) {
  const LyapConfig c = lyap_config_for_B({0.01, 0.13, 0.2}, m, sig);
  EXPECT_NEAR(c.varpi, 0.13 / 0.4, 1e-15);
  const RoaEstimate est = roa_estimate(c, m);
  bool found = false;
  for (const auto& p : est.pieces) {
    if (p.label != "phi_bound") continue;
    found = true;
    // Points on the piece satisfy q_2 = H(q_1).
    for (std::size_t k = 0; k < p.points.size(); k += 997) {
      EXPECT_NEAR(std::expm1(p.points[k][1]), hyperbola_H(std::expm1(p.points[k][0]), c, m), 1e-9);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(roa_membership_check(est.c_star, c, m, 200).violations, 0u);
}

TEST_F(Roa, EpsilonChangesLevelSetShape) {
  const auto a = level_set_contour(0.05, 0.2, m, 72);
  const auto b = level_set_contour(0.05, 2.0, m, 72);
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::hypot(a[k][0] - b[k][0], a[k][1] - b[k][1]));
  EXPECT_GT(diff, 1e-2);
  for (const Eta& e : a) EXPECT_NEAR(v1(e, 0.2, m), 0.05, 1e-9);
}

}  // namespace
