#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "oscbath/bath.hpp"
#include "oscbath/model.hpp"

namespace oscbath {

enum class Basis { transformed, bare };

/// Symmetric 2N×2N covariance matrix in the (q1,p1,…,qN,pN) ordering.
struct CovarianceState {
  double time = 0.0;
  Eigen::MatrixXd matrix;
  Basis basis = Basis::transformed;

  int n_modes() const noexcept { return static_cast<int>(matrix.rows() / 2); }
};

/// Smallest eigenvalue of V + (i/2)σ. Non-negative for a physical state.
double heisenberg_margin(const Eigen::MatrixXd& v);

/// Number of independent elements of a symmetric 2N×2N matrix, N(2N+1).
int packed_size(int n_modes);
/// Row-major position of V(i,j), i ≤ j, in the packed upper triangle.
int packed_index(int i, int j, int dim);
Eigen::VectorXd pack_upper(const Eigen::MatrixXd& v);
Eigen::MatrixXd unpack_upper(const Eigen::VectorXd& x, int dim);

/// Coefficients of the equations of motion at one instant.
struct DriftCoefficients {
  double mass = 1.0;
  double omega_f_sq = 1.0;    ///< Ω_F²
  double omega_bar_sq = 1.0;  ///< Ω̄²_N(t), including the counterterm when enabled
  double gamma = 0.0;         ///< 2γ_N(t)
  double f_n = 0.0;
  double d_n = 0.0;
};

DriftCoefficients drift_coefficients(double t, const SystemParams& params, const EffectiveFrequencies& freqs,
                                     const CoefficientTable& table);

/// A(t) in the transformed basis: free oscillators for modes 1..N−1, damped
/// and shifted oscillator for mode N.
Eigen::MatrixXd drift_matrix(double t, const SystemParams& params, const EffectiveFrequencies& freqs,
                             const CoefficientTable& table);

/// Dm(t): only the (qN,pN) = −f_N and (pN,pN) = 2D_N entries are non-zero.
Eigen::MatrixXd diffusion_matrix(double t, int n_modes, const CoefficientTable& table);

enum class BlockKind { A1, A2, A3, A4 };
const char* to_string(BlockKind kind) noexcept;

/// Coefficient matrix of one block, rows ordered as in `Block::elements`.
Eigen::MatrixXd block_matrix(BlockKind kind, const DriftCoefficients& c);

struct Block {
  BlockKind kind;
  int mode_a;  ///< transformed mode pair the block couples, mode_a ≤ mode_b
  int mode_b;
  std::vector<std::pair<int, int>> elements;  ///< covariance entries (i ≤ j)
  std::vector<int> packed;                    ///< same entries as packed indices
};

/// Direct-sum decomposition of the packed covariance equations. The element
/// map is recovered from the sparsity and coefficient pattern of the
/// Lyapunov operator, not written down by hand.
class BlockSystem {
 public:
  BlockSystem() = default;
  BlockSystem(int n_modes, std::vector<Block> blocks);

  int n_modes() const noexcept { return n_modes_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  int dimension() const noexcept;
  int count(BlockKind kind) const noexcept;

  /// ẋ = C(t)x + F(t) for the packed covariance vector x.
  void derivative(const Eigen::VectorXd& x, const DriftCoefficients& c, Eigen::VectorXd& dx) const;

 private:
  int n_modes_ = 0;
  std::vector<Block> blocks_;
};

BlockSystem build_block_system(const SystemParams& params);

enum class Engine { lyapunov, block };

struct EvolveOptions {
  double dt = 1e-3;
  double t_max = 30.0;
  Engine engine = Engine::lyapunov;
  /// Keep every `stride`-th step (the final state is always kept).
  int stride = 1;
  bool check_physicality = true;
};

struct Trajectory {
  std::vector<CovarianceState> states;
  /// Most negative Heisenberg margin seen; set only when checking is on.
  double worst_margin = 0.0;
  /// True when the margin fell below −1e−9 somewhere.
  bool nonphysical = false;
  std::vector<std::string> warnings;
};

/// Fixed-step classical RK4 from v0.time to options.t_max.
Trajectory evolve(const CovarianceState& v0, const SystemParams& params, const CoefficientTable& table,
                  const EvolveOptions& options);

/// Free-mode V⁺ for each relaxation-free mode plus two combinations per
/// free-mode pair: (N−1)² values, in row-major mode-pair order.
std::vector<double> constants_of_motion(const CovarianceState& v, const EffectiveFrequencies& freqs, double mass);

/// Closed-form evolution of one relaxation-free mode.
struct FreeBlockSolution {
  double v_plus = 0.0;
  double v_minus_0 = 0.0;
  double v12_0 = 0.0;
  double omega_f = 1.0;
  double mass = 1.0;

  /// (V⁻(t), V12(t)) measured from the reference time.
  std::pair<double, double> at(double t) const;
  /// (V_qq, V_qp, V_pp) of the mode.
  Eigen::Vector3d elements(double t) const;
};

std::pair<double, double> analytic_free_block(double t, double v_minus_0, double v12_0, double omega_f);

/// Solution seeded from mode `mode` (0-based, < N−1) of a transformed-basis state.
FreeBlockSolution free_block_solution(const CovarianceState& v, int mode, const EffectiveFrequencies& freqs,
                                      double mass);

/// Time average over the final five periods of 2Ω_F (or the whole
/// trajectory if shorter).
Eigen::MatrixXd stationary_average(const Trajectory& trajectory, double omega_f);

/// Columns t, then V_i_j for i ≤ j (1-based, row-major).
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace oscbath
