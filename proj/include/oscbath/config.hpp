#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "oscbath/bath.hpp"
#include "oscbath/dynamics.hpp"
#include "oscbath/model.hpp"
#include "oscbath/states.hpp"

namespace oscbath {

enum class StateFamily { ghz, asymmetric };

/// Everything a single simulation needs. Read from an INI-style file with
/// [system], [bath], [state], [run] and [outputs] sections.
struct RunConfig {
  SystemParams system;
  BathSpec bath;
  StateFamily family = StateFamily::ghz;
  GhzStateSpec ghz;  ///< n_modes follows system.n_modes
  AsymmetricStateSpec asymmetric;

  double t_max = 30.0;
  double dt = 1e-3;
  /// Spacing of stored trajectory samples and entanglement reports.
  double sample_dt = 0.01;
  Engine engine = Engine::lyapunov;

  bool write_trajectory = true;
  bool write_entanglement = true;
  bool write_coefficients = false;
  bool write_plot = true;
  std::string output_dir = "out";

  /// Throws Error(config_invalid | step_too_large | ...) on bad input.
  void validate() const;
  CovarianceState initial_state() const;
  /// Coefficient-table spacing: min(dt, 0.025/Λ, 0.01/Ω_N).
  double table_spacing() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);
/// Writes every field; parse_config reads it back to an equal RunConfig.
void dump_config(std::ostream& out, const RunConfig& config);

const char* to_string(StateFamily family) noexcept;
const char* to_string(Engine engine) noexcept;

}  // namespace oscbath
