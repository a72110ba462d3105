#include "oscbath/model.hpp"

#include <cmath>
#include <string>

#include "oscbath/error.hpp"

namespace oscbath {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_mode_count: return "InvalidModeCount";
    case Errc::frequency_imaginary: return "FrequencyImaginary";
    case Errc::invalid_parameter: return "InvalidParameter";
    case Errc::quadrature_failure: return "QuadratureFailure";
    case Errc::grid_too_coarse: return "GridTooCoarse";
    case Errc::time_out_of_range: return "TimeOutOfRange";
    case Errc::step_too_large: return "StepTooLarge";
    case Errc::basis_mismatch: return "BasisMismatch";
    case Errc::unsupported_mode_count: return "UnsupportedModeCount";
    case Errc::wrong_mode_count: return "WrongModeCount";
    case Errc::unphysical_moments: return "UnphysicalMoments";
    case Errc::index_error: return "IndexError";
    case Errc::no_sign_change: return "NoSignChange";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::io_failure: return "IoFailure";
  }
  return "Unknown";
}

void SystemParams::validate() const {
  if (n_modes < 2) {
    throw Error(Errc::invalid_mode_count, "n_modes must be >= 2, got " + std::to_string(n_modes));
  }
  if (!(mass > 0.0) || !(omega > 0.0) || !std::isfinite(lambda)) {
    throw Error(Errc::invalid_parameter, "mass and omega must be positive, lambda finite");
  }
  const double free_sq = omega * omega - lambda / mass;
  const double damped_sq = omega * omega + (n_modes - 1) * lambda / mass;
  if (!(free_sq > 0.0) || !(damped_sq > 0.0)) {
    throw Error(Errc::frequency_imaginary,
                "effective frequency radicand <= 0 (Omega^2 - lambda/M = " + std::to_string(free_sq) +
                    ", Omega^2 + (N-1) lambda/M = " + std::to_string(damped_sq) + ")");
  }
}

EffectiveFrequencies effective_frequencies(const SystemParams& params) {
  params.validate();
  const double w2 = params.omega * params.omega;
  return {std::sqrt(w2 - params.lambda / params.mass),
          std::sqrt(w2 + (params.n_modes - 1) * params.lambda / params.mass)};
}

ModeTransform::ModeTransform(int n_modes) {
  if (n_modes < 2) {
    throw Error(Errc::invalid_mode_count, "mode transform needs n_modes >= 2, got " + std::to_string(n_modes));
  }
  const int n = n_modes;
  matrix_ = Eigen::MatrixXd::Zero(n, n);
  // Row k (1-based, k < N): sqrt((N-k)/(N-k+1)) [e_k - (1/(N-k)) sum_{j>k} e_j]
  for (int row = 0; row < n - 1; ++row) {
    const int k = row + 1;
    const double rest = static_cast<double>(n - k);
    const double scale = std::sqrt(rest / (rest + 1.0));
    matrix_(row, row) = scale;
    for (int col = row + 1; col < n; ++col) matrix_(row, col) = -scale / rest;
  }
  matrix_.row(n - 1).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
}

ModeTransform mode_transform(int n_modes) { return ModeTransform(n_modes); }

Eigen::MatrixXd expand_to_phase_space(const ModeTransform& transform) {
  const int n = transform.n_modes();
  const auto& t = transform.matrix();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      s(2 * i, 2 * j) = t(i, j);
      s(2 * i + 1, 2 * j + 1) = t(i, j);
    }
  }
  return s;
}

Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    sigma(2 * k, 2 * k + 1) = 1.0;
    sigma(2 * k + 1, 2 * k) = -1.0;
  }
  return sigma;
}

}  // namespace oscbath
