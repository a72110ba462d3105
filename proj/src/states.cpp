#include "oscbath/states.hpp"

#include <cmath>
#include <fmt/format.h>
#include <ostream>

#include "oscbath/error.hpp"

namespace oscbath {
namespace {

// sinh(x)/x without the removable singularity at 0.
double sinhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

}  // namespace

double AsymmetricStateSpec::r_bar() const noexcept { return std::sqrt(8.0 * r0 * r0 + rs * rs); }

double AsymmetricStateSpec::q() const noexcept {
  const double rb = r_bar();
  return rb > 0.0 ? (8.0 * r0 + rs) / rb : 0.0;
}

CovarianceState ghz_initial_covariance(const GhzStateSpec& spec) {
  if (!(spec.r >= 0.0) || !std::isfinite(spec.r)) throw Error(Errc::invalid_parameter, "r must be >= 0");
  const double lo = 0.5 * std::exp(-2.0 * spec.r);
  const double hi = 0.5 * std::exp(2.0 * spec.r);
  Eigen::VectorXd diag;
  switch (spec.n_modes) {
    case 2: diag = Eigen::Vector4d(lo, hi, hi, lo); break;
    case 3: diag.resize(6); diag << lo, hi, lo, hi, hi, lo; break;
    default:
      throw Error(Errc::unsupported_mode_count,
                  fmt::format("GHZ covariance is defined for 2 or 3 modes, got {}", spec.n_modes));
  }
  return {0.0, diag.asDiagonal(), Basis::transformed};
}

CovarianceState asymmetric_initial_covariance(const AsymmetricStateSpec& spec) {
  if (!(spec.r0 >= 0.0) || !(spec.rs >= 0.0) || !std::isfinite(spec.r0) || !std::isfinite(spec.rs)) {
    throw Error(Errc::invalid_parameter, "r0 and rs must be >= 0");
  }
  const double rs = spec.rs;
  const double rb = spec.r_bar();
  const double ch = std::cosh(rb);
  // q·sinh(r̄) and (r0 − rs)·sinh(r̄)/r̄ through sinh(r̄)/r̄.
  const double q_sh = (8.0 * spec.r0 + rs) * sinhc(rb);
  const double cross = (spec.r0 - rs) * sinhc(rb);
  const double minus = 3.0 * ch - q_sh;
  const double plus = 3.0 * ch + q_sh;
  const double sqrt3 = std::sqrt(3.0);
  const double sqrt6 = std::sqrt(6.0);

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(6, 6);
  v(0, 0) = std::exp(-2.0 * rs) / 24.0 * (9.0 + std::exp(3.0 * rs) * minus);
  v(1, 1) = std::exp(2.0 * rs) / 24.0 * (9.0 + std::exp(-3.0 * rs) * plus);
  v(2, 2) = std::exp(-2.0 * rs) / 8.0 * (1.0 + std::exp(3.0 * rs) * minus);
  v(3, 3) = std::exp(2.0 * rs) / 8.0 * (1.0 + std::exp(-3.0 * rs) * plus);
  v(4, 4) = std::exp(rs) / 6.0 * plus;
  v(5, 5) = std::exp(-rs) / 6.0 * minus;
  v(0, 2) = -std::exp(-2.0 * rs) / (8.0 * sqrt3) * (3.0 - std::exp(3.0 * rs) * minus);
  v(1, 3) = -std::exp(2.0 * rs) / (8.0 * sqrt3) * (3.0 - std::exp(-3.0 * rs) * plus);
  v(2, 4) = -std::exp(rs) * cross / sqrt6;
  v(3, 5) = std::exp(-rs) * cross / sqrt6;
  // Position-row coupling of mode 1 to the damped mode sits at (q1, qN), the
  // momentum one at (p1, pN), each a 1/√3 fraction of the mode-2 coupling.
  v(0, 4) = v(2, 4) / sqrt3;
  v(1, 5) = v(3, 5) / sqrt3;
  v = v.selfadjointView<Eigen::Upper>();
  return {0.0, v, Basis::transformed};
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out << (j == 0 ? "" : ",") << fmt::format("{:.16e}", m(i, j));
    out << '\n';
  }
}

}  // namespace oscbath
