#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace agepop {

/// Row-major 2x2 real matrix.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  double trace() const noexcept { return a11 + a22; }
  double det() const noexcept { return a11 * a22 - a12 * a21; }
};

/// Eigenvalues from the characteristic polynomial s^2 - tr s + det.
/// Ordered by ascending real part, then ascending imaginary part.
inline std::array<std::complex<double>, 2> eigenvalues(const Mat2& m) {
  const double half_tr = 0.5 * m.trace();
  const double disc = half_tr * half_tr - m.det();
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return {std::complex<double>(half_tr - r, 0.0), std::complex<double>(half_tr + r, 0.0)};
  }
  const double im = std::sqrt(-disc);
  return {std::complex<double>(half_tr, -im), std::complex<double>(half_tr, im)};
}

inline bool is_hurwitz(const Mat2& m) { return m.trace() < 0.0 && m.det() > 0.0; }

/// Smallest eigenvalue of a symmetric 2x2 matrix (a12 is used as the off-diagonal).
inline double symmetric_min_eigenvalue(const Mat2& m) {
  const double mean = 0.5 * (m.a11 + m.a22);
  const double half_diff = 0.5 * (m.a11 - m.a22);
  return mean - std::hypot(half_diff, m.a12);
}

}  // namespace agepop
