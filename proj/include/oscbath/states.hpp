#pragma once

#include <iosfwd>

#include "oscbath/dynamics.hpp"

namespace oscbath {

/// Symmetric multi-mode squeezed vacuum, diagonal in the transformed basis.
struct GhzStateSpec {
  int n_modes = 3;
  double r = 1.0;
};

/// Three-mode squeezed vacuum correlating each free mode with the damped mode
/// (r0) and the free modes among themselves (rs).
struct AsymmetricStateSpec {
  double r0 = 1.0;
  double rs = 1.489;

  /// √(8r0² + rs²)
  double r_bar() const noexcept;
  /// (8r0 + rs)/r̄; zero-over-zero at the origin is reported as 0.
  double q() const noexcept;
};

/// Transformed-basis covariance; only N = 2 and N = 3 are defined.
CovarianceState ghz_initial_covariance(const GhzStateSpec& spec);

/// Transformed-basis covariance of the N = 3 asymmetric state.
CovarianceState asymmetric_initial_covariance(const AsymmetricStateSpec& spec);

/// Plain comma-separated matrix, one row per line.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace oscbath
