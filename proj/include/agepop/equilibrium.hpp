#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>

#include "agepop/error.hpp"
#include "agepop/grid.hpp"
#include "agepop/linalg2.hpp"
#include "agepop/model.hpp"

namespace agepop {

struct LotkaSharpeOptions {
  double tolerance = 1e-12;     // on |F(zeta) - 1|
  int max_iterations = 200;
  double initial_bound = 10.0;  // first bracket is [-b, b]
  double max_bound = 1e4;       // doubling stops here
};

namespace detail {

/// F(zeta) = int k(a) exp(-M(a) - zeta a) da with M the cumulative mortality.
inline double lotka_sharpe_integral(const GridFn& k, const GridFn& cum_mu, const AgeGrid& grid,
                                    double zeta) {
  const std::size_t n = grid.size();
  const double h = grid.step();
  double inner = 0.0;
  auto term = [&](std::size_t j) { return k[j] * std::exp(-cum_mu[j] - zeta * grid.node(j)); };
  for (std::size_t j = 1; j + 1 < n; ++j) inner += term(j);
  return h * (inner + 0.5 * (term(0) + term(n - 1)));
}

}  // namespace detail

/// Solves the Lotka-Sharpe characteristic equation int k e^{-int mu - zeta a} = 1
/// for the intrinsic growth exponent zeta. F is strictly decreasing in zeta; the
/// root is bracketed by doubling and refined by bisection.
inline double solve_lotka_sharpe(const GridFn& mu, const GridFn& k, const AgeGrid& grid,
                                 const LotkaSharpeOptions& opt = {}) {
  require_on_grid(mu, grid, "solve_lotka_sharpe(mu)");
  require_on_grid(k, grid, "solve_lotka_sharpe(k)");
  if (!(quad(k, grid) > 0.0)) throw ConfigError("solve_lotka_sharpe: birth kernel integral must be positive");
  if (mu.min() < 0.0) throw ConfigError("solve_lotka_sharpe: mortality must be nonnegative");

  const GridFn cum_mu = cumulative_trapezoid(mu, grid);
  auto F = [&](double z) { return detail::lotka_sharpe_integral(k, cum_mu, grid, z); };

  double lo = -opt.initial_bound;
  double hi = opt.initial_bound;
  double f_lo = F(lo);
  double f_hi = F(hi);
  while (!(f_lo > 1.0) && lo > -opt.max_bound) {
    lo *= 2.0;
    f_lo = F(lo);
  }
  while (!(f_hi < 1.0) && hi < opt.max_bound) {
    hi *= 2.0;
    f_hi = F(hi);
  }
  if (f_lo == 1.0) return lo;
  if (f_hi == 1.0) return hi;
  if (!(f_lo > 1.0) || !(f_hi < 1.0)) {
    std::ostringstream msg;
    msg << "solve_lotka_sharpe: bracket not found within +-" << opt.max_bound << " (F(" << lo
        << ")=" << f_lo << ", F(" << hi << ")=" << f_hi << ")";
    throw NumericalError(msg.str());
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < opt.max_iterations; ++it) {
    mid = 0.5 * (lo + hi);
    const double f_mid = F(mid);
    if (std::abs(f_mid - 1.0) <= opt.tolerance) return mid;
    if (f_mid > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
  }
  return mid;
}

inline constexpr double kDefaultEquilibriumTolerance = 1e-8;

/// Steady state of the predator-prey population for a given equilibrium dilution.
struct Equilibrium {
  AgeGrid grid{1.0, 1};
  double u_star = 0.0;
  std::array<double, 2> zeta{};
  std::array<double, 2> lambda{};   // lambda_1 = int g_2 x_1*, lambda_2 = int g_1 x_2*
  std::array<double, 2> x0_star{};  // newborn densities x_i*(0)
  std::array<GridFn, 2> x_star;
  std::array<GridFn, 2> xtilde;     // x_i*(a) / x_i*(0)
  std::array<GridFn, 2> ktilde;     // discounted birth kernels
  std::array<GridFn, 2> cum_mu;     // cumulative mortality int_0^a mu_i

  double lambda1() const noexcept { return lambda[0]; }
  double lambda2() const noexcept { return lambda[1]; }

  /// Admissible interval for u*: (0, min(zeta_1, zeta_2)).
  double max_u_star() const noexcept { return std::min(zeta[0], zeta[1]); }
};

/// The three scalars the reduced (eta) dynamics depend on.
struct ReducedModel {
  double u_star = 0.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

inline ReducedModel reduced(const Equilibrium& eq) {
  return {eq.u_star, eq.lambda[0], eq.lambda[1]};
}

inline std::array<double, 2> lotka_sharpe_exponents(const KernelSet& ks, const AgeGrid& grid,
                                                    const LotkaSharpeOptions& opt = {}) {
  return {solve_lotka_sharpe(ks[0].mu, ks[0].k, grid, opt),
          solve_lotka_sharpe(ks[1].mu, ks[1].k, grid, opt)};
}

inline Equilibrium compute_equilibrium(const KernelSet& ks, double u_star, const AgeGrid& grid,
                                       const LotkaSharpeOptions& opt = {}) {
  validate_kernels(ks, grid);
  Equilibrium eq;
  eq.grid = grid;
  eq.u_star = u_star;
  eq.zeta = lotka_sharpe_exponents(ks, grid, opt);
  if (!(u_star > 0.0) || !(u_star < eq.max_u_star())) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "infeasible setpoint u* = " << u_star << ": the equilibrium dilution must satisfy "
        << "u* = zeta_1 - lambda_2 = zeta_2 - 1/lambda_1 in (0, min(zeta_1, zeta_2)) = (0, "
        << eq.max_u_star() << ")";
    throw ConfigError(msg.str());
  }

  for (std::size_t i = 0; i < 2; ++i) {
    eq.cum_mu[i] = cumulative_trapezoid(ks[i].mu, grid);
    const double z = eq.zeta[i];
    const GridFn& cm = eq.cum_mu[i];
    eq.xtilde[i] = GridFn(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      eq.xtilde[i][j] = std::exp(-cm[j] - z * grid.node(j));
    }
    eq.ktilde[i] = ks[i].k * eq.xtilde[i];
  }

  const double g2_x1 = quad_product(ks[kPredator].g, eq.xtilde[kPrey], grid);
  const double g1_x2 = quad_product(ks[kPrey].g, eq.xtilde[kPredator], grid);
  eq.x0_star[kPrey] = 1.0 / ((eq.zeta[kPredator] - u_star) * g2_x1);
  eq.x0_star[kPredator] = (eq.zeta[kPrey] - u_star) / g1_x2;
  for (std::size_t i = 0; i < 2; ++i) eq.x_star[i] = eq.x0_star[i] * eq.xtilde[i];
  eq.lambda[kPrey] = quad_product(ks[kPredator].g, eq.x_star[kPrey], grid);
  eq.lambda[kPredator] = quad_product(ks[kPrey].g, eq.x_star[kPredator], grid);
  return eq;
}

/// Jacobian of the open-loop reduced model at eta = 0: [[0, -lambda_2], [1/lambda_1, 0]].
inline Mat2 open_loop_jacobian(double lambda1, double lambda2) {
  return Mat2{0.0, -lambda2, 1.0 / lambda1, 0.0};
}

/// Eigenvalues of the open-loop Jacobian, +-i sqrt(lambda_2/lambda_1).
inline std::array<std::complex<double>, 2> open_loop_jacobian_eigs(double lambda1, double lambda2) {
  return eigenvalues(open_loop_jacobian(lambda1, lambda2));
}

inline std::array<std::complex<double>, 2> open_loop_jacobian_eigs(const Equilibrium& eq) {
  return open_loop_jacobian_eigs(eq.lambda1(), eq.lambda2());
}

}  // namespace agepop
