#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <utility>
#include <vector>

#include "oscbath/dynamics.hpp"

namespace oscbath {

using cplx = std::complex<double>;

/// V' = Sᵀ V S (transformed → bare); throws BasisMismatch if already bare.
CovarianceState to_bare_basis(const CovarianceState& v);
CovarianceState to_transformed_basis(const CovarianceState& v);

/// Minimum eigenvalue of Γ_j V' Γ_j + (i/2)σ, with Γ_j flipping the momentum
/// of mode j (0-based). Negative means entangled across that transposition.
double negativity(const CovarianceState& v_bare, int j);

/// Closed-form squeezing parameters built from the bare moments of modes 1
/// and 2, exactly as in the matching construction of the three-mode state.
struct SqueezeMatchParams {
  double r1 = 0.0;
  double r2 = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  cplx m1, m2;
  double m3 = 0.0, m4 = 0.0;
  cplx f1;
  double f2 = 0.0, f3 = 0.0;
  double h1 = 0.0, h2 = 0.0;
  /// |m1| = 0 or |f1| = 0 left the corresponding angle at its 0 default.
  bool phi_undefined = false;
  bool theta_undefined = false;
};

/// Throws UnphysicalMoments when m3 ≤ 2|m1|.
SqueezeMatchParams squeeze_match_params(const CovarianceState& v_bare);

/// Per-mode Bogoliubov map ã_k = α_k a_k + β_k a_k†.
struct LocalTransform {
  std::vector<cplx> alpha;
  std::vector<cplx> beta;

  int n_modes() const noexcept { return static_cast<int>(alpha.size()); }
  /// Real 2×2 action on (q_k, p_k).
  Eigen::Matrix2d block(int k) const;
  /// Block-diagonal 2N×2N real map.
  Eigen::MatrixXd matrix() const;
};

/// (r1, φ) on mode 1 and (r2, θ) on the remaining modes.
LocalTransform local_transform(double r1, double phi, double r2, double theta, int n_modes);
LocalTransform local_transform(const SqueezeMatchParams& p, int n_modes);

/// 2N×2N characteristic-function correlation matrix in the (ỹ1, x̃1, …)
/// ordering; the identity for the vacuum. a, b, c, d are the mode-1 and
/// mode-1/mode-2 entries, which fix G for permutation-symmetric states.
struct GMatrix {
  Eigen::MatrixXd matrix;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  /// Three-mode matrix with the symmetric (a, b, c, d) pattern.
  static GMatrix from_parameters(double a, double b, double c, double d);
};

/// G from second moments of the locally transformed operators, propagated
/// through the complex Bogoliubov coefficients.
GMatrix g_matrix(const CovarianceState& v_bare, const LocalTransform& transform);

/// a = −2f₃e^{2r₂}, b = −2f₃e^{−2r₂}, c = 2h₁e^{2r₂}, d = 2h₂e^{−2r₂} as
/// printed. These do not agree with g_matrix (vacuum gives a = −2); kept for
/// comparison only.
GMatrix g_parameters_as_printed(const SqueezeMatchParams& p);

/// ⟨ΔX̃_i²⟩ + ⟨ΔỸ_j²⟩ for the collective quadratures (0-based i ≠ j).
double combined_variance(const GMatrix& g, int i, int j);

/// Uniform local squeeze (same r1, φ, θ on every mode, r2 = 0) minimising
/// ⟨ΔX̃_i²⟩ + ⟨ΔỸ_j²⟩ for one pair. The minimum is
/// 2·sqrt(det B·λ_min(B⁻¹A)) with A, B the transformed 2×2 blocks of modes
/// i and j.
struct OptimalSqueeze {
  double variance = 1.0;
  double r1 = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  LocalTransform transform;
};

OptimalSqueeze optimal_uniform_squeeze(const CovarianceState& v_transformed, int i, int j);

struct EntanglementReport {
  double time = 0.0;
  std::vector<double> eta;
  /// (i, j) pairs in row-major order, i ≠ j, 0-based.
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> combined_variances;
  double best_variance = 1.0;
  std::pair<int, int> best_pair{0, 1};
  double r1 = 0.0, r2 = 0.0, phi = 0.0, theta = 0.0;

  double min_eta() const;
};

/// Negativities plus the squeezing analysis of a transformed-basis state.
EntanglementReport entanglement_report(const CovarianceState& v_transformed);

/// One report per trajectory sample; OpenMP over samples.
std::vector<EntanglementReport> evaluate_reports(const Trajectory& trajectory);
/// Single-threaded reference of the above.
std::vector<EntanglementReport> evaluate_reports_serial(const Trajectory& trajectory);

/// Columns t, eta_1..eta_N, var_min, var_i_j per pair, r1, r2, phi, theta.
void write_entanglement_csv(std::ostream& out, const std::vector<EntanglementReport>& reports);

/// V11·V44 − ¼ for two modes in the transformed basis; negative ⇒ entangled.
double two_mode_threshold(const CovarianceState& v);

/// r* = ½ ln(2N̄(ω) + 1); zero at T = 0.
double squeezing_threshold(double temperature, double omega);

}  // namespace oscbath
