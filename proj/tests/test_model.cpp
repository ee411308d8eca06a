#include <cmath>

#include <gtest/gtest.h>

#include "agepop/equilibrium.hpp"
#include "agepop/grid.hpp"
#include "agepop/model.hpp"

using namespace agepop;

namespace {

const AgeGrid kGrid(1.0, 400);

TEST(Quad, ConstantIntegrandIsExact) {
  EXPECT_NEAR(quad(GridFn::constant(kGrid, 1.0), kGrid), 1.0, 1e-14);
}

TEST(Quad, InteractionKernelShape) {
  const GridFn f = GridFn::sample(kGrid, [](double a) { return 0.4 * (a - a * a); });
  EXPECT_NEAR(quad(f, kGrid), 0.4 / 6.0, 1e-5);  // trapezoid error O(da^2)
}

TEST(Quad, BirthKernelShape) {
  const GridFn f = GridFn::sample(kGrid, [](double a) { return 3.0 * std::exp(-a); });
  EXPECT_NEAR(quad(f, kGrid), 3.0 * (1.0 - std::exp(-1.0)), 1e-5);
  EXPECT_NEAR(quad(f, kGrid), 1.89636, 1e-5);
}

TEST(Quad, ErrorIsSecondOrder) {
  auto err = [](int n) {
    const AgeGrid g(1.0, n);
    return std::abs(quad(GridFn::sample(g, [](double a) { return std::exp(-a); }), g) -
                    (1.0 - std::exp(-1.0)));
  };
  EXPECT_NEAR(err(100) / err(200), 4.0, 0.05);
}

TEST(Quad, RejectsMismatchedGrid) {
  EXPECT_THROW(quad(GridFn::constant(AgeGrid(1.0, 10), 1.0), kGrid), ConfigError);
}

TEST(CumulativeTrapezoid, MatchesClosedFormOfExponential) {
  const GridFn c = cumulative_trapezoid(GridFn::sample(kGrid, [](double a) { return std::exp(a); }), kGrid);
  EXPECT_EQ(c[0], 0.0);
  EXPECT_NEAR(c[kGrid.size() - 1], std::exp(1.0) - 1.0, 1e-5);
}

TEST(BuildKernels, ReferenceValues) {
  const KernelSet ks = build_kernels({}, {}, kGrid);
  EXPECT_DOUBLE_EQ(ks[kPrey].mu[0], 0.5);
  EXPECT_DOUBLE_EQ(ks[kPrey].g[0], 0.0);
  EXPECT_NEAR(ks[kPrey].g[kGrid.size() - 1], 0.0, 1e-15);
  EXPECT_NEAR(ks[kPredator].k[kGrid.size() - 1], 3.0 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(ks[kPredator].k[kGrid.size() - 1], 1.10364, 1e-5);
}

TEST(BuildKernels, RejectsNonpositiveShape) {
  EXPECT_THROW(build_kernels({0.5, 3.0, 0.0}, {}, kGrid), ConfigError);
  EXPECT_THROW(build_kernels({}, {-1.0, 3.0, 0.4}, kGrid), ConfigError);
}

TEST(TabulatedKernels, RejectsNegativeSamples) {
  SpeciesKernels s = build_species_kernels({}, kGrid);
  SpeciesKernels bad = s;
  bad.k[3] = -1.0;
  EXPECT_THROW(tabulated_kernels(s, bad, kGrid), ConfigError);
  EXPECT_NO_THROW(tabulated_kernels(s, s, kGrid));
}

TEST(BcResidual, EquilibriumSatisfiesRenewal) {
  const KernelSet ks = build_kernels({}, {}, kGrid);
  const Equilibrium eq = compute_equilibrium(ks, 0.15, kGrid);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LT(bc_residual(eq.x_star[i], ks[i].k, kGrid) / eq.x_star[i][0], 1e-6);
    EXPECT_TRUE(is_state_compatible(eq.x_star[i], ks[i].k, kGrid));
  }
}

TEST(BcResidual, ZeroBirthKernel) {
  EXPECT_DOUBLE_EQ(bc_residual(GridFn::constant(kGrid, 1.0), GridFn::constant(kGrid, 0.0), kGrid), 1.0);
}

TEST(BcResidual, DoubledBoundaryNode) {
  const KernelSet ks = build_kernels({}, {}, kGrid);
  const Equilibrium eq = compute_equilibrium(ks, 0.15, kGrid);
  GridFn x = eq.x_star[kPrey];
  x[0] *= 2.0;
  // The residual is about half the new boundary value 2 x(0): doubling adds x(0)
  // to the left side and only (da/2) k(0) x(0) to the integral.
  const double x0 = eq.x_star[kPrey][0];
  EXPECT_NEAR(bc_residual(x, ks[kPrey].k, kGrid), x0 * (1.0 - 0.5 * kGrid.step() * 3.0), 1e-8 * x0);
  EXPECT_FALSE(is_state_compatible(x, ks[kPrey].k, kGrid));
}

TEST(PopulationState, RequirePositive) {
  PopulationState s{0.0, {GridFn::constant(kGrid, 1.0), GridFn::constant(kGrid, 1.0)}};
  EXPECT_NO_THROW(s.require_positive());
  s.x[1][5] = 0.0;
  EXPECT_THROW(s.require_positive(), NumericalError);
}

}  // namespace
