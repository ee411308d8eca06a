#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "agepop/model.hpp"

namespace agepop {

/// Recorded time series of a simulation run. All series have equal length;
/// V, G1, G2 are NaN when the run had no Lyapunov configuration.
struct Trajectory {
  std::string solver;
  std::vector<double> times;
  std::vector<std::array<double, 2>> eta;
  std::vector<double> u;
  std::vector<double> v0;
  std::vector<double> v1;
  std::vector<double> v;
  std::vector<double> g1;
  std::vector<double> g2;
  std::vector<std::array<double, 2>> psi_sup;  // sup_a |psi_i(t - a)|
  std::vector<PopulationState> snapshots;

  std::size_t size() const noexcept { return times.size(); }
};

}  // namespace agepop
