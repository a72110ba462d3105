#include "oscbath/entanglement.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>

#include "oscbath/bath.hpp"
#include "oscbath/error.hpp"

namespace oscbath {

CovarianceState to_bare_basis(const CovarianceState& v) {
  if (v.basis != Basis::transformed) throw Error(Errc::basis_mismatch, "state is already in the bare basis");
  const Eigen::MatrixXd s = expand_to_phase_space(mode_transform(v.n_modes()));
  return {v.time, s.transpose() * v.matrix * s, Basis::bare};
}

CovarianceState to_transformed_basis(const CovarianceState& v) {
  if (v.basis != Basis::bare) throw Error(Errc::basis_mismatch, "state is already in the transformed basis");
  const Eigen::MatrixXd s = expand_to_phase_space(mode_transform(v.n_modes()));
  return {v.time, s * v.matrix * s.transpose(), Basis::transformed};
}

double negativity(const CovarianceState& v_bare, int j) {
  if (v_bare.basis != Basis::bare) throw Error(Errc::basis_mismatch, "negativity expects a bare-basis state");
  const int n = v_bare.n_modes();
  if (j < 0 || j >= n) throw Error(Errc::index_error, fmt::format("mode {} out of range for {} modes", j, n));
  Eigen::MatrixXcd h = v_bare.matrix.cast<cplx>();
  // Γ_j flips p_j: negate row and column 2j+1 (the diagonal entry keeps its sign).
  h.row(2 * j + 1) *= -1.0;
  h.col(2 * j + 1) *= -1.0;
  for (int k = 0; k < n; ++k) {
    h(2 * k, 2 * k + 1) += cplx(0.0, 0.5);
    h(2 * k + 1, 2 * k) -= cplx(0.0, 0.5);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

namespace {

// φ from z = |z|e^{2iφ}, taken in (−π/2, π/2] so a negative real z gives +π/2
// whatever the sign of its zero imaginary part.
double half_angle(cplx z) {
  const double a = std::atan2(z.imag() == 0.0 ? 0.0 : z.imag(), z.real());
  return 0.5 * a;
}

}  // namespace

SqueezeMatchParams squeeze_match_params(const CovarianceState& v_bare) {
  if (v_bare.basis != Basis::bare) throw Error(Errc::basis_mismatch, "squeeze parameters use bare moments");
  if (v_bare.n_modes() < 2) throw Error(Errc::wrong_mode_count, "need at least two modes");
  auto v = [&](int i, int j) { return v_bare.matrix(i - 1, j - 1); };
  SqueezeMatchParams p;
  p.m1 = 0.5 * cplx(v(1, 1) - v(2, 2), -2.0 * v(1, 2));
  p.m2 = cplx(v(1, 3) - v(2, 4), -(v(1, 4) + v(2, 3)));
  p.m3 = v(1, 1) + v(2, 2);
  p.m4 = v(1, 3) + v(2, 4);
  const double abs_m1 = std::abs(p.m1);
  if (!(p.m3 > 2.0 * abs_m1)) {
    throw Error(Errc::unphysical_moments, fmt::format("m3={} <= 2|m1|={}", p.m3, 2.0 * abs_m1));
  }
  if (abs_m1 == 0.0) {
    p.phi_undefined = true;
  } else {
    p.phi = half_angle(p.m1);
  }
  p.r1 = 0.25 * std::log((p.m3 - 2.0 * abs_m1) / (p.m3 + 2.0 * abs_m1));

  const double u1 = std::cosh(p.r1);
  const double v1 = std::sinh(p.r1);
  const cplx e2 = std::polar(1.0, 2.0 * p.phi);
  p.f1 = p.m2 * u1 * u1 + std::conj(p.m2) * e2 * e2 * v1 * v1 + 2.0 * p.m4 * e2 * u1 * v1;
  p.f2 = ((p.m2 / e2 + std::conj(p.m2) * e2) * u1 * v1).real() + p.m4 * (1.0 + 2.0 * v1 * v1);
  p.f3 = 4.0 * abs_m1 * u1 * v1 + p.m3 * (1.0 + 2.0 * v1 * v1);
  const double abs_f1 = std::abs(p.f1);
  if (abs_f1 == 0.0) {
    p.theta_undefined = true;
  } else {
    p.theta = half_angle(p.f1);
  }
  p.h1 = abs_f1 - p.f2;
  p.h2 = -(abs_f1 + p.f2);
  const double ratio = (std::abs(p.h2) + p.f3) / (std::abs(p.h1) + p.f3);
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(Errc::unphysical_moments, "second squeezing parameter is not real");
  }
  p.r2 = 0.25 * std::log(ratio);
  return p;
}

Eigen::Matrix2d LocalTransform::block(int k) const {
  const cplx s = alpha[static_cast<std::size_t>(k)] + beta[static_cast<std::size_t>(k)];
  const cplx d = alpha[static_cast<std::size_t>(k)] - beta[static_cast<std::size_t>(k)];
  Eigen::Matrix2d m;
  m << s.real(), -d.imag(), s.imag(), d.real();
  return m;
}

Eigen::MatrixXd LocalTransform::matrix() const {
  const int n = n_modes();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) m.block<2, 2>(2 * k, 2 * k) = block(k);
  return m;
}

LocalTransform local_transform(double r1, double phi, double r2, double theta, int n_modes) {
  const double u1 = std::cosh(r1), v1 = std::sinh(r1);
  const double u2 = std::cosh(r2), v2 = std::sinh(r2);
  const cplx w = std::polar(1.0, 2.0 * (phi - theta));
  const cplx et = std::polar(1.0, theta);
  const cplx a1 = et * (u1 * u2 - w * v1 * v2);
  const cplx b1 = std::conj(et) * (u1 * v2 - std::conj(w) * v1 * u2);
  const cplx a2 = et * (u1 * u2 + w * v1 * v2);
  const cplx b2 = -std::conj(et) * (u1 * v2 + std::conj(w) * v1 * u2);
  LocalTransform t;
  t.alpha.assign(static_cast<std::size_t>(n_modes), a2);
  t.beta.assign(static_cast<std::size_t>(n_modes), b2);
  t.alpha[0] = a1;
  t.beta[0] = b1;
  return t;
}

LocalTransform local_transform(const SqueezeMatchParams& p, int n_modes) {
  return local_transform(p.r1, p.phi, p.r2, p.theta, n_modes);
}

GMatrix GMatrix::from_parameters(double a, double b, double c, double d) {
  GMatrix g;
  g.a = a;
  g.b = b;
  g.c = c;
  g.d = d;
  g.matrix = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      g.matrix(2 * i, 2 * j) = (i == j) ? a : c;
      g.matrix(2 * i + 1, 2 * j + 1) = (i == j) ? b : d;
    }
  }
  return g;
}

GMatrix g_matrix(const CovarianceState& v_bare, const LocalTransform& transform) {
  if (v_bare.basis != Basis::bare) throw Error(Errc::basis_mismatch, "G is built from bare moments");
  const int n = v_bare.n_modes();
  if (transform.n_modes() != n) throw Error(Errc::wrong_mode_count, "transform and state mode counts differ");
  const auto& v = v_bare.matrix;
  // Symmetrised ⟨a_i a_j⟩ and ⟨a_i† a_j⟩.
  Eigen::MatrixXcd mm(n, n), nn(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double qq = v(2 * i, 2 * j), pp = v(2 * i + 1, 2 * j + 1);
      const double qp = v(2 * i, 2 * j + 1), pq = v(2 * i + 1, 2 * j);
      mm(i, j) = 0.5 * cplx(qq - pp, qp + pq);
      nn(i, j) = 0.5 * cplx(qq + pp, qp - pq);
    }
  }
  GMatrix g;
  g.matrix.resize(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx ai = transform.alpha[static_cast<std::size_t>(i)], bi = transform.beta[static_cast<std::size_t>(i)];
      const cplx aj = transform.alpha[static_cast<std::size_t>(j)], bj = transform.beta[static_cast<std::size_t>(j)];
      const cplx m_t = ai * aj * mm(i, j) + ai * bj * nn(j, i) + bi * aj * nn(i, j) + bi * bj * std::conj(mm(i, j));
      const cplx n_t = std::conj(ai) * aj * nn(i, j) + std::conj(ai) * bj * std::conj(mm(i, j)) +
                       std::conj(bi) * aj * mm(i, j) + std::conj(bi) * bj * nn(j, i);
      const double qq = (m_t + n_t).real();
      const double pp = (n_t - m_t).real();
      const double qp = (m_t + n_t).imag();
      const double pq = (m_t - n_t).imag();
      // μ = (ỹ_k, x̃_k): ỹ pairs with momentum, x̃ with position.
      g.matrix(2 * i, 2 * j) = 2.0 * pp;
      g.matrix(2 * i, 2 * j + 1) = -2.0 * pq;
      g.matrix(2 * i + 1, 2 * j) = -2.0 * qp;
      g.matrix(2 * i + 1, 2 * j + 1) = 2.0 * qq;
    }
  }
  g.a = g.matrix(0, 0);
  g.b = g.matrix(1, 1);
  g.c = g.matrix(0, 2);
  g.d = g.matrix(1, 3);
  return g;
}

GMatrix g_parameters_as_printed(const SqueezeMatchParams& p) {
  const double up = std::exp(2.0 * p.r2), down = std::exp(-2.0 * p.r2);
  return GMatrix::from_parameters(-2.0 * p.f3 * up, -2.0 * p.f3 * down, 2.0 * p.h1 * up, 2.0 * p.h2 * down);
}

double combined_variance(const GMatrix& g, int i, int j) {
  const int n = static_cast<int>(g.matrix.rows() / 2);
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) {
    throw Error(Errc::index_error, fmt::format("invalid quadrature pair ({}, {}) for {} modes", i, j, n));
  }
  const Eigen::MatrixXd t = mode_transform(n).matrix();
  double x = 0.0, y = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      x += t(i, k) * t(i, l) * g.matrix(2 * k + 1, 2 * l + 1);
      y += t(j, k) * t(j, l) * g.matrix(2 * k, 2 * l);
    }
  }
  return 0.5 * (x + y);
}

OptimalSqueeze optimal_uniform_squeeze(const CovarianceState& v_transformed, int i, int j) {
  if (v_transformed.basis != Basis::transformed) {
    throw Error(Errc::basis_mismatch, "optimal squeeze expects a transformed-basis state");
  }
  const int n = v_transformed.n_modes();
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) {
    throw Error(Errc::index_error, fmt::format("invalid quadrature pair ({}, {}) for {} modes", i, j, n));
  }
  const Eigen::Matrix2d a = v_transformed.matrix.block<2, 2>(2 * i, 2 * i);
  const Eigen::Matrix2d b = v_transformed.matrix.block<2, 2>(2 * j, 2 * j);
  const double det_b = b.determinant();
  if (!(det_b > 0.0) || !(b(0, 0) > 0.0)) throw Error(Errc::unphysical_moments, "mode block is not positive definite");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> solver(a, b);
  const double lambda = std::max(solver.eigenvalues()(0), 0.0);
  const Eigen::Vector2d v = solver.eigenvectors().col(0);  // vᵀBv = 1

  OptimalSqueeze out;
  out.variance = 2.0 * std::sqrt(det_b * lambda);
  if (lambda <= 0.0) throw Error(Errc::unphysical_moments, "degenerate quadrature block");

  // First row u of the 2×2 map minimises uᵀAu; the second row w is the
  // cheapest completion with det = 1.
  const Eigen::Vector2d u = std::pow(det_b / lambda, 0.25) * v;
  const Eigen::Vector2d c(-u(1), u(0));
  const Eigen::Vector2d binv_c = b.ldlt().solve(c);
  const Eigen::Vector2d w = binv_c / c.dot(binv_c);

  const cplx alpha = 0.5 * cplx(u(0) + w(1), w(0) - u(1));
  const cplx beta = 0.5 * cplx(u(0) - w(1), w(0) + u(1));
  out.r1 = std::asinh(std::abs(beta));
  out.theta = std::arg(alpha);
  out.phi = std::abs(beta) > 0.0 ? 0.5 * (out.theta - std::arg(-beta)) : 0.0;
  out.transform.alpha.assign(static_cast<std::size_t>(n), alpha);
  out.transform.beta.assign(static_cast<std::size_t>(n), beta);
  return out;
}

double EntanglementReport::min_eta() const {
  return eta.empty() ? 0.0 : *std::min_element(eta.begin(), eta.end());
}

EntanglementReport entanglement_report(const CovarianceState& v_transformed) {
  const CovarianceState bare = to_bare_basis(v_transformed);
  const int n = v_transformed.n_modes();
  EntanglementReport r;
  r.time = v_transformed.time;
  for (int j = 0; j < n; ++j) r.eta.push_back(negativity(bare, j));

  OptimalSqueeze best;
  best.variance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      auto candidate = optimal_uniform_squeeze(v_transformed, i, j);
      if (candidate.variance < best.variance) {
        best = std::move(candidate);
        r.best_pair = {i, j};
      }
    }
  }
  // All pairs are reported under the single transform that is optimal for the best pair.
  const GMatrix g = g_matrix(bare, best.transform);
  r.best_variance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      r.pairs.emplace_back(i, j);
      r.combined_variances.push_back(combined_variance(g, i, j));
      r.best_variance = std::min(r.best_variance, r.combined_variances.back());
    }
  }
  r.r1 = best.r1;
  r.phi = best.phi;
  r.theta = best.theta;
  return r;
}

std::vector<EntanglementReport> evaluate_reports(const Trajectory& trajectory) {
  const auto count = static_cast<std::ptrdiff_t>(trajectory.states.size());
  std::vector<EntanglementReport> out(static_cast<std::size_t>(count));
  bool failed = false;
  std::string failure;
  Errc code = Errc::unphysical_moments;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    try {
      out[static_cast<std::size_t>(k)] = entanglement_report(trajectory.states[static_cast<std::size_t>(k)]);
    } catch (const Error& e) {
#pragma omp critical(oscbath_report_failure)
      {
        if (!failed) {
          failed = true;
          failure = e.what();
          code = e.code();
        }
      }
    }
  }
  if (failed) throw Error(code, failure);
  return out;
}

std::vector<EntanglementReport> evaluate_reports_serial(const Trajectory& trajectory) {
  std::vector<EntanglementReport> out;
  out.reserve(trajectory.states.size());
  for (const auto& s : trajectory.states) out.push_back(entanglement_report(s));
  return out;
}

void write_entanglement_csv(std::ostream& out, const std::vector<EntanglementReport>& reports) {
  if (reports.empty()) return;
  const auto& first = reports.front();
  out << "t";
  for (std::size_t j = 0; j < first.eta.size(); ++j) out << fmt::format(",eta_{}", j + 1);
  out << ",var_min";
  for (const auto& [i, j] : first.pairs) out << fmt::format(",var_{}_{}", i + 1, j + 1);
  out << ",r1,r2,phi,theta\n";
  for (const auto& r : reports) {
    out << fmt::format("{:.10g}", r.time);
    for (double e : r.eta) out << fmt::format(",{:.16e}", e);
    out << fmt::format(",{:.16e}", r.best_variance);
    for (double v : r.combined_variances) out << fmt::format(",{:.16e}", v);
    out << fmt::format(",{:.16e},{:.16e},{:.16e},{:.16e}\n", r.r1, r.r2, r.phi, r.theta);
  }
}

double two_mode_threshold(const CovarianceState& v) {
  if (v.n_modes() != 2) throw Error(Errc::wrong_mode_count, fmt::format("need 2 modes, got {}", v.n_modes()));
  if (v.basis != Basis::transformed) throw Error(Errc::basis_mismatch, "threshold uses transformed-basis elements");
  return v.matrix(0, 0) * v.matrix(3, 3) - 0.25;
}

double squeezing_threshold(double temperature, double omega) {
  return 0.5 * std::log(2.0 * mean_occupation(omega, temperature) + 1.0);
}

}  // namespace oscbath
