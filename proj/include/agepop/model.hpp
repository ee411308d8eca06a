#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "agepop/error.hpp"
#include "agepop/grid.hpp"

namespace agepop {

/// Species index. The prey is species 0, the predator species 1.
inline constexpr std::size_t kPrey = 0;
inline constexpr std::size_t kPredator = 1;

/// Shape parameters of the closed-form kernel family
///   mu(a) = mu_bar e^a,  k(a) = k_bar e^{-a},  g(a) = g_bar (a - a^2).
struct KernelShape {
  double mu_bar = 0.5;
  double k_bar = 3.0;
  double g_bar = 0.4;
};

/// Mortality, birth and interaction kernels of one species.
struct SpeciesKernels {
  GridFn mu;
  GridFn k;
  GridFn g;
  std::optional<KernelShape> shape;
};

struct KernelSet {
  std::array<SpeciesKernels, 2> species;

  const SpeciesKernels& operator[](std::size_t i) const { return species[i]; }
};

/// Checks nonnegativity and strictly positive integrals of every kernel.
inline void validate_kernels(const KernelSet& ks, const AgeGrid& grid) {
  static constexpr const char* names[] = {"mu", "k", "g"};
  for (std::size_t i = 0; i < 2; ++i) {
    const SpeciesKernels& s = ks.species[i];
    const GridFn* fns[] = {&s.mu, &s.k, &s.g};
    for (int f = 0; f < 3; ++f) {
      const std::string label = std::string(names[f]) + "_" + std::to_string(i + 1);
      require_on_grid(*fns[f], grid, label.c_str());
      if (fns[f]->min() < 0.0) throw ConfigError("kernel " + label + " takes negative values");
      if (!(quad(*fns[f], grid) > 0.0)) {
        throw ConfigError("kernel " + label + " must have a strictly positive integral");
      }
    }
  }
}

inline SpeciesKernels build_species_kernels(const KernelShape& p, const AgeGrid& grid) {
  if (!(p.mu_bar > 0.0) || !(p.k_bar > 0.0) || !(p.g_bar > 0.0)) {
    throw ConfigError("kernel shape parameters must be positive (mu_bar=" +
                      std::to_string(p.mu_bar) + ", k_bar=" + std::to_string(p.k_bar) +
                      ", g_bar=" + std::to_string(p.g_bar) + ")");
  }
  SpeciesKernels s;
  s.mu = GridFn::sample(grid, [&](double a) { return p.mu_bar * std::exp(a); });
  s.k = GridFn::sample(grid, [&](double a) { return p.k_bar * std::exp(-a); });
  // a - a^2 is negative for a > 1; clip so that grids with A > 1 stay admissible.
  s.g = GridFn::sample(grid, [&](double a) { return p.g_bar * std::max(0.0, a - a * a); });
  s.shape = p;
  return s;
}

inline KernelSet build_kernels(const KernelShape& prey, const KernelShape& predator,
                               const AgeGrid& grid) {
  KernelSet ks{{build_species_kernels(prey, grid), build_species_kernels(predator, grid)}};
  validate_kernels(ks, grid);
  return ks;
}

/// Kernels from user-supplied tables (one sample per grid node).
inline KernelSet tabulated_kernels(SpeciesKernels prey, SpeciesKernels predator,
                                   const AgeGrid& grid) {
  prey.shape.reset();
  predator.shape.reset();
  KernelSet ks{{std::move(prey), std::move(predator)}};
  validate_kernels(ks, grid);
  return ks;
}

/// Population densities x_1 (prey) and x_2 (predator) at time t.
struct PopulationState {
  double t = 0.0;
  std::array<GridFn, 2> x;

  void require_positive() const {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < x[i].size(); ++j) {
        if (!(x[i][j] > 0.0)) {
          throw NumericalError("population x_" + std::to_string(i + 1) +
                               " is not strictly positive at node " + std::to_string(j) +
                               " (t=" + std::to_string(t) + ")");
        }
      }
    }
  }
};

/// |x(0) - int k x|, the violation of the renewal boundary condition.
inline double bc_residual(const GridFn& x, const GridFn& k, const AgeGrid& grid) {
  return std::abs(x[0] - quad_product(k, x, grid));
}

inline constexpr double kDefaultBcTolerance = 1e-6;

/// Whether x is accepted as a member of the state space F_i (positivity plus
/// renewal BC within tol_bc relative to x(0)).
inline bool is_state_compatible(const GridFn& x, const GridFn& k, const AgeGrid& grid,
                                double tol_bc = kDefaultBcTolerance) {
  if (x.min() <= 0.0) return false;
  return bc_residual(x, k, grid) <= tol_bc * x[0];
}

}  // namespace agepop
