#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agepop/equilibrium.hpp"
#include "agepop/error.hpp"
#include "agepop/grid.hpp"
#include "agepop/model.hpp"

// Change of variables x -> (eta, psi): eta_i = ln Pi_i[x_i] is the log of a
// weighted total abundance and psi_i the age-shape deviation, which evolves by
// an autonomous renewal integral delay equation.

namespace agepop {

/// Adjoint eigenfunction pi_{0,i} and the normalizing integral of Pi_i.
struct AdjointData {
  GridFn pi0;
  double denom = 0.0;            // int pi0 x*, the discrete normalizer of Pi
  double denom_continuous = 0.0; // int a k x*, equal to denom up to O(h^2)
};

/// pi0(a) = int_a^A k(s) exp(Lambda(a) - Lambda(s)) ds, Lambda(a) = int_0^a (zeta + mu).
/// Evaluated by a backward trapezoid recursion so no exponential of a large
/// positive Lambda is ever formed.
inline AdjointData compute_pi0(const GridFn& cum_mu, const GridFn& k, double zeta,
                               const GridFn& x_star, const AgeGrid& grid) {
  require_on_grid(cum_mu, grid, "compute_pi0(cum_mu)");
  require_on_grid(k, grid, "compute_pi0(k)");
  require_on_grid(x_star, grid, "compute_pi0(x_star)");
  const std::size_t n = grid.size();
  const double h = grid.step();
  std::vector<double> pi0(n, 0.0);
  for (std::size_t j = n - 1; j-- > 0;) {
    const double lam_j = cum_mu[j] + zeta * grid.node(j);
    const double lam_next = cum_mu[j + 1] + zeta * grid.node(j + 1);
    const double decay = std::exp(lam_j - lam_next);
    pi0[j] = decay * pi0[j + 1] + 0.5 * h * (k[j] + k[j + 1] * decay);
  }
  AdjointData out;
  out.pi0 = GridFn(std::move(pi0));
  // int pi0 x* = int a k x* holds exactly in the continuum; normalizing by the
  // discrete left-hand side makes Pi[x*] = 1 and the equilibrium an exact
  // fixed point of the discrete transform.
  out.denom_continuous = quad(GridFn::sample(grid, [](double a) { return a; }) * k * x_star, grid);
  out.denom = quad_product(out.pi0, x_star, grid);
  if (!(out.denom > 0.0)) throw NumericalError("compute_pi0: int pi0 x* must be positive");
  return out;
}

inline std::array<AdjointData, 2> compute_adjoint(const KernelSet& ks, const Equilibrium& eq) {
  return {compute_pi0(eq.cum_mu[0], ks[0].k, eq.zeta[0], eq.x_star[0], eq.grid),
          compute_pi0(eq.cum_mu[1], ks[1].k, eq.zeta[1], eq.x_star[1], eq.grid)};
}

/// Pi[x] = int pi0 x / int pi0 x*. Linear and positive on positive profiles.
inline double pi_functional(const GridFn& x, const AdjointData& adj, const AgeGrid& grid) {
  const double value = quad_product(adj.pi0, x, grid) / adj.denom;
  if (!(value > 0.0)) {
    throw NumericalError("pi_functional: nonpositive value " + std::to_string(value) +
                         " (profile is not strictly positive)");
  }
  return value;
}

/// Trailing history psi(t - a_j), j = 0..n_cells, sampled on the age grid.
/// Index 0 is the newest sample psi(t), index n_cells the oldest psi(t - A).
class HistoryBuffer {
 public:
  HistoryBuffer() = default;
  HistoryBuffer(std::vector<double> samples, double window)
      : samples_(std::move(samples)), window_(window) {
    for (std::size_t j = 0; j < samples_.size(); ++j) check_admissible(samples_[j], j);
  }

  static HistoryBuffer zeros(const AgeGrid& grid) {
    return HistoryBuffer(std::vector<double>(grid.size(), 0.0), grid.max_age());
  }

  std::size_t size() const noexcept { return samples_.size(); }
  double window() const noexcept { return window_; }
  double operator[](std::size_t j) const noexcept { return samples_[j]; }
  std::span<const double> samples() const noexcept { return samples_; }
  GridFn as_gridfn() const { return GridFn(samples_); }
  double newest() const { return samples_.front(); }

  double min() const { return *std::min_element(samples_.begin(), samples_.end()); }
  double sup_norm() const {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Advances time by one age step: the new sample becomes psi(t), the oldest drops off.
  void push(double newest) {
    check_admissible(newest, 0);
    std::copy_backward(samples_.begin(), samples_.end() - 1, samples_.end());
    samples_.front() = newest;
  }

 private:
  static void check_admissible(double v, std::size_t j) {
    if (!(v > -1.0) || !std::isfinite(v)) {
      throw NumericalError("history sample " + std::to_string(j) + " = " + std::to_string(v) +
                           " is not admissible (must exceed -1)");
    }
  }

  std::vector<double> samples_;
  double window_ = 0.0;
};

struct TransformedState {
  double t = 0.0;
  std::array<double, 2> eta{};
  std::array<HistoryBuffer, 2> psi;
};

inline TransformedState to_transformed(const PopulationState& state, const Equilibrium& eq,
                                       const std::array<AdjointData, 2>& adj) {
  const AgeGrid& grid = eq.grid;
  state.require_positive();
  TransformedState ts;
  ts.t = state.t;
  for (std::size_t i = 0; i < 2; ++i) {
    require_on_grid(state.x[i], grid, "to_transformed");
    const double pi = pi_functional(state.x[i], adj[i], grid);
    ts.eta[i] = std::log(pi);
    std::vector<double> psi(grid.size());
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] = state.x[i][j] / (eq.x_star[i][j] * pi) - 1.0;
    ts.psi[i] = HistoryBuffer(std::move(psi), grid.max_age());
  }
  return ts;
}

/// x_i(a, t) = x_i*(a) e^{eta_i} (1 + psi_i(t - a)).
inline PopulationState reconstruct(const TransformedState& ts, const Equilibrium& eq) {
  PopulationState out;
  out.t = ts.t;
  for (std::size_t i = 0; i < 2; ++i) {
    const HistoryBuffer& psi = ts.psi[i];
    if (psi.size() != eq.grid.size()) throw ConfigError("reconstruct: history/grid size mismatch");
    if (!(psi.min() > -1.0)) throw NumericalError("reconstruct: history sample <= -1");
    const double scale = std::exp(ts.eta[i]);
    std::vector<double> x(psi.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = eq.x_star[i][j] * scale * (1.0 + psi[j]);
    out.x[i] = GridFn(std::move(x));
  }
  return out;
}

/// Normalized interaction densities: gbar_1 = g_1 x_2* / int g_1 x_2*,
/// gbar_2 = g_2 x_1* / int g_2 x_1*.
inline std::array<GridFn, 2> g_bar(const KernelSet& ks, const Equilibrium& eq) {
  std::array<GridFn, 2> out;
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t j = 1 - i;
    GridFn w = ks[i].g * eq.x_star[j];
    const double total = quad(w, eq.grid);
    if (!(total > 0.0)) throw ConfigError("g_bar: degenerate interaction kernel (zero integral)");
    out[i] = w * (1.0 / total);
  }
  return out;
}

/// v = ln(1 + int gbar(a) psi(t - a) da). Pass gbar_2 for species 1 and gbar_1 for species 2.
inline double v_map(const HistoryBuffer& psi, const GridFn& gbar, const AgeGrid& grid) {
  const double arg = 1.0 + quad_product(psi.as_gridfn(), gbar, grid);
  if (!(arg > 0.0)) {
    throw NumericalError("v_map: 1 + int gbar psi = " + std::to_string(arg) +
                         " <= 0, history outside the admissible set");
  }
  return std::log(arg);
}

/// Residuals of membership in S_i: (|P(psi)|, |psi(0) - int ktilde(a) psi(-a) da|).
inline std::pair<double, double> check_S(const HistoryBuffer& psi, const GridFn& ktilde,
                                         const AgeGrid& grid) {
  require_on_grid(ktilde, grid, "check_S");
  if (psi.size() != grid.size()) throw ConfigError("check_S: history/grid size mismatch");
  const GridFn p = psi.as_gridfn();
  const GridFn tail = tail_trapezoid(ktilde, grid);
  const double first_moment = quad(GridFn::sample(grid, [](double a) { return a; }) * ktilde, grid);
  const double P = quad_product(p, tail, grid) / first_moment;
  const double renewal = p[0] - quad_product(ktilde, p, grid);
  return {std::abs(P), std::abs(renewal)};
}

/// Adds the affine correction c0 + c1 a that moves psi onto S_i (both residuals
/// of check_S vanish up to roundoff). Useful to build compatible initial histories.
inline HistoryBuffer project_onto_S(const HistoryBuffer& psi, const GridFn& ktilde,
                                    const AgeGrid& grid) {
  const GridFn one = GridFn::constant(grid, 1.0);
  const GridFn age = GridFn::sample(grid, [](double a) { return a; });
  const GridFn tail = tail_trapezoid(ktilde, grid);
  auto P = [&](const GridFn& f) { return quad_product(f, tail, grid); };
  auto R = [&](const GridFn& f) { return f[0] - quad_product(ktilde, f, grid); };
  const GridFn p = psi.as_gridfn();
  const double m11 = P(one), m12 = P(age), m21 = R(one), m22 = R(age);
  const double det = m11 * m22 - m12 * m21;
  if (std::abs(det) < 1e-300) throw NumericalError("project_onto_S: singular correction system");
  const double r1 = -P(p), r2 = -R(p);
  const double c0 = (r1 * m22 - m12 * r2) / det;
  const double c1 = (m11 * r2 - m21 * r1) / det;
  std::vector<double> out(p.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = p[j] + c0 + c1 * grid.node(j);
  return HistoryBuffer(std::move(out), grid.max_age());
}

/// Component of psi along the constant (neutral) mode of the discrete renewal
/// recursion psi_new = sum_{j>=1} c_j psi(-a_{j-1}), c_j = w_j k_j / (1 - w_0 k_0),
/// which is the one the history solver uses. With sum c_j = 1 the functional
/// Q = sum_i T_{i+1} psi[i], T_l = sum_{j>=l} c_j, is exactly conserved by the
/// recursion; the return value is Q(psi) / Q(1). It agrees with the continuum
/// projection of check_S up to O(h).
inline double discrete_neutral_component(const HistoryBuffer& psi, const GridFn& ktilde,
                                         const AgeGrid& grid) {
  require_on_grid(ktilde, grid, "discrete_neutral_component");
  if (psi.size() != grid.size()) throw ConfigError("discrete_neutral_component: history/grid size mismatch");
  const auto w = grid.trapezoid_weights();
  const std::size_t n = grid.size() - 1;
  const double diag = 1.0 - w[0] * ktilde[0];
  if (!(diag > 0.0)) throw NumericalError("discrete_neutral_component: grid too coarse for the birth kernel");
  double tail = 0.0, q = 0.0, q_one = 0.0;
  for (std::size_t l = n; l >= 1; --l) {
    tail += w[l] * ktilde[l] / diag;  // T_l
    q += tail * psi[l - 1];
    q_one += tail;
  }
  return q / q_one;
}

/// Re-splits x = x* e^eta (1 + psi) so that each history has no component
/// along the discrete neutral mode: psi -> (psi - c) / (1 + c),
/// eta -> eta + ln(1 + c). The represented population is unchanged.
inline TransformedState remove_discrete_neutral_mode(TransformedState ts, const Equilibrium& eq) {
  for (std::size_t i = 0; i < 2; ++i) {
    const double c = discrete_neutral_component(ts.psi[i], eq.ktilde[i], eq.grid);
    if (!(c > -1.0)) throw NumericalError("remove_discrete_neutral_mode: neutral component <= -1");
    std::vector<double> p(ts.psi[i].size());
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = (ts.psi[i][j] - c) / (1.0 + c);
    ts.psi[i] = HistoryBuffer(std::move(p), eq.grid.max_age());
    ts.eta[i] += std::log1p(c);
  }
  return ts;
}

}  // namespace agepop
