#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oscbath/model.hpp"

namespace oscbath {

/// Gaussian-cutoff reservoir, J(ω) = (2/π) γ0 ω M (ω/Λ)^{n−1} exp(−ω²/Λ²).
struct BathSpec {
  double gamma0 = 0.05;
  double cutoff = 100.0;
  double ohmicity = 1.0;
  double temperature = 10.0;
  /// Add the static counterterm (2/M)∫J(ω)/ω dω to the damped-mode frequency
  /// so only the finite (Lamb-shift) part of the bath renormalisation remains.
  bool renormalize = true;

  void validate() const;
  /// Non-fatal diagnostics, e.g. sub-Ohmic baths at finite temperature.
  std::vector<std::string> warnings() const;
};

double spectral_density(double omega, const BathSpec& spec, double mass);

/// Bose occupation 1/(exp(ω/T) − 1); zero at T = 0.
double mean_occupation(double omega, double temperature);

/// J(ω)·(1 + 2N̄(ω)), with the ω → 0 limit taken analytically.
double noise_integrand(double omega, const BathSpec& spec, double mass);

/// Π(t) = ∫₀^∞ J(ω) sin(ωt) dω, truncated at 8Λ.
double dissipation_kernel(double t, const BathSpec& spec, double mass);

/// ν(t) = ∫₀^∞ J(ω) cos(ωt) [1 + 2N̄(ω)] dω, truncated at 8Λ.
double noise_kernel(double t, const BathSpec& spec, double mass);

/// (2/M)∫₀^∞ J(ω)/ω dω = (2/π) γ0 Λ Γ(n/2): the long-time magnitude of the
/// raw frequency shift for Λ ≫ Ω_N.
double frequency_counterterm(const BathSpec& spec);

struct CoefficientSample {
  double omega_shift_sq = 0.0;  ///< Ω̃²_N(t)
  double gamma_n = 0.0;         ///< γ_N(t)
  double d_n = 0.0;             ///< D_N(t)
  double f_n = 0.0;             ///< f_N(t)
};

/// Time-dependent master-equation coefficients of the damped mode on a
/// uniform grid. Once both kernels have decayed below the horizon tolerance
/// the coefficients are held at their last (plateau) values.
class CoefficientTable {
 public:
  CoefficientTable() = default;
  CoefficientTable(double spacing, double t_max, double counterterm, std::vector<CoefficientSample> samples);

  double spacing() const noexcept { return spacing_; }
  double t_max() const noexcept { return t_max_; }
  /// Last time with an explicitly integrated sample.
  double horizon() const noexcept { return spacing_ * static_cast<double>(samples_.size() - 1); }
  /// Zero when the bath is not renormalised.
  double counterterm() const noexcept { return counterterm_; }
  const std::vector<CoefficientSample>& samples() const noexcept { return samples_; }

  /// Cubic (four-point Lagrange) interpolation; throws TimeOutOfRange outside [0, t_max].
  CoefficientSample at(double t) const;

  /// Ω̄²_N(t) = Ω_N² + Ω̃²_N(t) (+ counterterm).
  double omega_bar_sq(double t, double omega_n) const;

 private:
  double spacing_ = 0.0;
  double t_max_ = 0.0;
  double counterterm_ = 0.0;
  std::vector<CoefficientSample> samples_;
};

struct TableOptions {
  /// Kernels are treated as zero once |kernel| < tol·peak over a 2/Λ window.
  double horizon_tolerance = 1e-14;
  /// Kernel points evaluated per batch between horizon checks.
  int batch = 256;
};

/// OpenMP-parallel kernel sampling; cumulative Simpson integration.
CoefficientTable build_coefficient_table(const BathSpec& spec, const EffectiveFrequencies& freqs, double mass,
                                         double t_max, double dt, const TableOptions& options = {});

/// Single-threaded reference of the above; results are bit-identical.
CoefficientTable build_coefficient_table_serial(const BathSpec& spec, const EffectiveFrequencies& freqs, double mass,
                                                double t_max, double dt, const TableOptions& options = {});

/// Columns t, omega_shift_sq, gamma_n, d_n, f_n on a grid of step `output_dt`
/// over [0, t_max] (plateau values past the horizon).
void write_coefficients_csv(std::ostream& out, const CoefficientTable& table, double output_dt);

}  // namespace oscbath
