#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oscbath/config.hpp"
#include "oscbath/entanglement.hpp"

namespace oscbath {

/// Late-time figures of merit over t ∈ [0.8·t_max, t_max].
struct RunSummary {
  double late_mean_min_eta = 0.0;
  double late_mean_best_variance = 1.0;
  /// max − min of min η over the late window.
  double late_eta_amplitude = 0.0;
  /// Per transposed mode.
  std::vector<double> late_mean_eta;
  /// Disjoint stretches of the whole trajectory with min η < −1e−9.
  int entangled_intervals = 0;
  bool late_entangled = false;
};

/// Verdict threshold: separable states sit at min η = 0 up to round-off.
inline constexpr double kEntangledBelow = -1e-9;

RunSummary summarize(const std::vector<EntanglementReport>& reports, double t_max);
int count_entangled_intervals(const std::vector<EntanglementReport>& reports);

struct RunResult {
  RunConfig config;
  CoefficientTable table;
  Trajectory trajectory;
  std::vector<EntanglementReport> reports;
  RunSummary summary;
  std::vector<std::filesystem::path> files;
};

/// Builds the coefficient table, evolves and analyses; no file output.
/// With `late_only` the entanglement reports cover only the late window.
RunResult simulate(const RunConfig& config, bool late_only = false);

/// simulate() plus the CSV/SVG outputs and an effective-config dump in
/// config.output_dir. Identical configs give byte-identical CSVs.
RunResult run(const RunConfig& config);

/// Parameters a sweep may vary.
bool is_sweep_parameter(const std::string& name);
void set_parameter(RunConfig& config, const std::string& name, double value);

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
  RunConfig base;
};

struct SweepRow {
  double value = 0.0;
  RunSummary summary;
  bool ok = false;
  std::string status;
};

/// Rows ordered by value and run concurrently (OSCBATH_THREADS caps the
/// worker count). Failed rows carry their diagnostic in `status`.
std::vector<SweepRow> sweep(const SweepSpec& spec);
void write_sweep_csv(std::ostream& out, const std::string& parameter, const std::vector<SweepRow>& rows);

/// Worker count honouring OSCBATH_THREADS.
int worker_count();

struct ThresholdResult {
  double r = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int evaluations = 0;
  double t_max = 0.0;
};

/// Bisection on the late-time entanglement verdict of the GHZ squeezing
/// parameter until the bracket is narrower than `tolerance`. The horizon is
/// stretched to max(t_max, 10/γ0) so the damped mode has relaxed.
ThresholdResult threshold_find(const RunConfig& base, double r_lo, double r_hi, double tolerance = 1e-3);

struct PresetRun {
  std::string label;
  RunConfig config;
};

/// fig2, fig3, fig4 or fig5. Throws config_invalid for other names.
std::vector<PresetRun> preset_runs(const std::string& name);

/// One row per labelled run: late-time means, amplitude and interval count.
void write_summary_csv(std::ostream& out, const std::vector<std::pair<std::string, RunSummary>>& rows);

}  // namespace oscbath
