#pragma once

#include <Eigen/Dense>

namespace oscbath {

/// N identical oscillators of mass M and bare frequency Ω with pairwise
/// position coupling λ. Natural units ħ = k_B = 1.
struct SystemParams {
  int n_modes = 3;
  double mass = 1.0;
  double omega = 1.0;
  double lambda = 0.0;

  /// Throws Error(invalid_mode_count | invalid_parameter | frequency_imaginary).
  void validate() const;
};

struct EffectiveFrequencies {
  double omega_f = 1.0;  ///< the N−1 relaxation-free modes
  double omega_n = 1.0;  ///< the damped symmetric mode
};

EffectiveFrequencies effective_frequencies(const SystemParams& params);

/// Real orthogonal N×N matrix taking bare positions (q_1..q_N) to the
/// collective coordinates; the last row is the uniform symmetric mode.
/// The same matrix acts on momenta.
class ModeTransform {
 public:
  explicit ModeTransform(int n_modes);

  int n_modes() const noexcept { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

ModeTransform mode_transform(int n_modes);

/// 2N×2N interleaved (q_1,p_1,…,q_N,p_N) version of the mode transform.
/// V_transformed = S·V_bare·Sᵀ.
Eigen::MatrixXd expand_to_phase_space(const ModeTransform& transform);

/// Block-diagonal σ with [[0,1],[−1,0]] on each mode.
Eigen::MatrixXd symplectic_form(int n_modes);

}  // namespace oscbath
