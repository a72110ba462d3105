#include "oscbath/runner.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <ostream>

#include "oscbath/error.hpp"
#include "oscbath/plot.hpp"

namespace oscbath {
namespace {

constexpr double kLateFraction = 0.8;

bool in_late_window(double t, double t_max) { return t >= kLateFraction * t_max - 1e-9; }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, fmt::format("cannot write '{}'", path.string()));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(Errc::io_failure, fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

int count_entangled_intervals(const std::vector<EntanglementReport>& reports) {
  int intervals = 0;
  bool inside = false;
  for (const auto& r : reports) {
    const bool entangled = r.min_eta() < kEntangledBelow;
    if (entangled && !inside) ++intervals;
    inside = entangled;
  }
  return intervals;
}

RunSummary summarize(const std::vector<EntanglementReport>& reports, double t_max) {
  RunSummary s;
  s.entangled_intervals = count_entangled_intervals(reports);
  double eta_sum = 0.0, var_sum = 0.0;
  double eta_lo = 0.0, eta_hi = 0.0;
  int count = 0;
  for (const auto& r : reports) {
    if (!in_late_window(r.time, t_max)) continue;
    const double m = r.min_eta();
    if (count == 0) {
      eta_lo = eta_hi = m;
      s.late_mean_eta.assign(r.eta.size(), 0.0);
    }
    eta_lo = std::min(eta_lo, m);
    eta_hi = std::max(eta_hi, m);
    eta_sum += m;
    var_sum += r.best_variance;
    for (std::size_t j = 0; j < r.eta.size(); ++j) s.late_mean_eta[j] += r.eta[j];
    ++count;
  }
  if (count == 0) return s;
  s.late_mean_min_eta = eta_sum / count;
  s.late_mean_best_variance = var_sum / count;
  s.late_eta_amplitude = eta_hi - eta_lo;
  for (auto& e : s.late_mean_eta) e /= count;
  s.late_entangled = s.late_mean_min_eta < kEntangledBelow;
  return s;
}

RunResult simulate(const RunConfig& config, bool late_only) {
  config.validate();
  for (const auto& w : config.bath.warnings()) fmt::print(stderr, "warning: {}\n", w);
  RunResult result;
  result.config = config;
  const auto freqs = effective_frequencies(config.system);
  result.table = build_coefficient_table(config.bath, freqs, config.system.mass, config.t_max, config.table_spacing());

  EvolveOptions options;
  options.dt = config.dt;
  options.t_max = config.t_max;
  options.engine = config.engine;
  options.stride = static_cast<int>(std::lround(config.sample_dt / config.dt));
  result.trajectory = evolve(config.initial_state(), config.system, result.table, options);
  for (const auto& w : result.trajectory.warnings) fmt::print(stderr, "warning: {}\n", w);

  if (late_only) {
    Trajectory late;
    for (const auto& s : result.trajectory.states) {
      if (in_late_window(s.time, config.t_max)) late.states.push_back(s);
    }
    result.reports = evaluate_reports(late);
  } else {
    result.reports = evaluate_reports(result.trajectory);
  }
  result.summary = summarize(result.reports, config.t_max);
  return result;
}

RunResult run(const RunConfig& config) {
  RunResult result = simulate(config);
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_failure, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  auto emit = [&](const std::string& name, auto&& writer) {
    const auto path = dir / name;
    auto out = open_output(path);
    writer(out);
    finish(out, path);
    result.files.push_back(path);
  };
  emit("config.ini", [&](std::ostream& o) { dump_config(o, config); });
  if (config.write_trajectory) emit("trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, result.trajectory); });
  if (config.write_entanglement) {
    emit("entanglement.csv", [&](std::ostream& o) { write_entanglement_csv(o, result.reports); });
  }
  if (config.write_coefficients) {
    emit("coefficients.csv", [&](std::ostream& o) { write_coefficients_csv(o, result.table, config.sample_dt); });
  }
  if (config.write_plot) {
    const std::string title =
        config.family == StateFamily::ghz
            ? fmt::format("GHZ r={} gamma0={} lambda={} T={}", config.ghz.r, config.bath.gamma0, config.system.lambda,
                          config.bath.temperature)
            : fmt::format("asymmetric r0={} rs={} gamma0={} lambda={}", config.asymmetric.r0, config.asymmetric.rs,
                          config.bath.gamma0, config.system.lambda);
    emit("plot.svg", [&](std::ostream& o) { write_svg_plot(o, result.reports, title); });
  }
  return result;
}

bool is_sweep_parameter(const std::string& name) {
  return name == "r" || name == "r0" || name == "rs" || name == "gamma0" || name == "lambda" || name == "temperature";
}

void set_parameter(RunConfig& config, const std::string& name, double value) {
  if (name == "r") {
    config.ghz.r = value;
  } else if (name == "r0") {
    config.asymmetric.r0 = value;
  } else if (name == "rs") {
    config.asymmetric.rs = value;
  } else if (name == "gamma0") {
    config.bath.gamma0 = value;
  } else if (name == "lambda") {
    config.system.lambda = value;
  } else if (name == "temperature") {
    config.bath.temperature = value;
  } else {
    throw Error(Errc::config_invalid,
                fmt::format("unknown sweep parameter '{}' (r, r0, rs, gamma0, lambda, temperature)", name));
  }
}

int worker_count() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("OSCBATH_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<int>(n, static_cast<int>(cap));
  }
  return std::max(n, 1);
}

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  if (!is_sweep_parameter(spec.parameter)) {
    throw Error(Errc::config_invalid, fmt::format("unknown sweep parameter '{}'", spec.parameter));
  }
  if (spec.values.empty()) throw Error(Errc::config_invalid, "sweep value list is empty");
  std::vector<double> values = spec.values;
  std::sort(values.begin(), values.end());

  std::vector<SweepRow> rows(values.size());
  const auto count = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    auto& row = rows[static_cast<std::size_t>(k)];
    row.value = values[static_cast<std::size_t>(k)];
    try {
      RunConfig config = spec.base;
      set_parameter(config, spec.parameter, row.value);
      row.summary = simulate(config, /*late_only=*/true).summary;
      row.ok = true;
      row.status = "ok";
    } catch (const std::exception& e) {
      row.ok = false;
      row.status = e.what();
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::string& parameter, const std::vector<SweepRow>& rows) {
  out << fmt::format("{},late_min_eta,late_min_variance,late_eta_amplitude,status\n", parameter);
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    if (r.ok) {
      out << fmt::format("{},{:.16e},{:.16e},{:.16e},{}\n", r.value, r.summary.late_mean_min_eta,
                         r.summary.late_mean_best_variance, r.summary.late_eta_amplitude, status);
    } else {
      out << fmt::format("{},,,,{}\n", r.value, status);
    }
  }
}

ThresholdResult threshold_find(const RunConfig& base, double r_lo, double r_hi, double tolerance) {
  if (base.family != StateFamily::ghz) throw Error(Errc::config_invalid, "threshold search varies the GHZ r");
  if (!(r_lo < r_hi) || !(tolerance > 0.0)) throw Error(Errc::config_invalid, "need r_lo < r_hi and tolerance > 0");
  RunConfig config = base;
  if (config.bath.gamma0 > 0.0) config.t_max = std::max(config.t_max, 10.0 / config.bath.gamma0);

  ThresholdResult result;
  result.t_max = config.t_max;
  auto entangled = [&](double r) {
    RunConfig c = config;
    c.ghz.r = r;
    ++result.evaluations;
    return simulate(c, /*late_only=*/true).summary.late_entangled;
  };
  double lo = r_lo, hi = r_hi;
  const bool lo_state = entangled(lo);
  const bool hi_state = entangled(hi);
  if (lo_state == hi_state) {
    throw Error(Errc::no_sign_change, fmt::format("late-time verdict is {} at both r={} and r={}",
                                                  lo_state ? "entangled" : "separable", r_lo, r_hi));
  }
  while (hi - lo >= tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (entangled(mid) == lo_state) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.lo = lo;
  result.hi = hi;
  result.r = 0.5 * (lo + hi);
  return result;
}

std::vector<PresetRun> preset_runs(const std::string& name) {
  RunConfig base;  // γ0 = 0.05, Λ = 100, n = 1, T = 10, λ = 0, N = 3
  std::vector<PresetRun> runs;
  auto add = [&](const std::string& label, RunConfig c) {
    c.output_dir = label;
    runs.push_back({label, std::move(c)});
  };
  if (name == "fig2" || name == "fig4") {
    if (name == "fig4") base.system.lambda = 0.8;
    for (double r : {1.0, 1.498, 2.0}) {
      RunConfig c = base;
      c.ghz.r = r;
      add(fmt::format("r_{}", r), c);
    }
  } else if (name == "fig3") {
    for (double g : {0.05, 1.0, 5.0}) {
      RunConfig c = base;
      c.ghz.r = 1.6;
      c.bath.gamma0 = g;
      add(fmt::format("gamma0_{}", g), c);
    }
  } else if (name == "fig5") {
    base.family = StateFamily::asymmetric;
    base.asymmetric.rs = 1.489;
    base.t_max = std::max(base.t_max, 10.0 / base.bath.gamma0);
    for (double r0 : {1.0, 1.489, 2.0}) {
      RunConfig c = base;
      c.asymmetric.r0 = r0;
      add(fmt::format("r0_{}", r0), c);
    }
  } else {
    throw Error(Errc::config_invalid, fmt::format("unknown preset '{}' (fig2, fig3, fig4, fig5)", name));
  }
  return runs;
}

void write_summary_csv(std::ostream& out, const std::vector<std::pair<std::string, RunSummary>>& rows) {
  std::size_t modes = 0;
  for (const auto& [label, s] : rows) modes = std::max(modes, s.late_mean_eta.size());
  out << "label,late_min_eta";
  for (std::size_t j = 0; j < modes; ++j) out << fmt::format(",late_eta_{}", j + 1);
  out << ",late_min_variance,late_eta_amplitude,entangled_intervals,late_entangled\n";
  for (const auto& [label, s] : rows) {
    out << fmt::format("{},{:.16e}", label, s.late_mean_min_eta);
    for (std::size_t j = 0; j < modes; ++j) {
      out << fmt::format(",{:.16e}", j < s.late_mean_eta.size() ? s.late_mean_eta[j] : 0.0);
    }
    out << fmt::format(",{:.16e},{:.16e},{},{}\n", s.late_mean_best_variance, s.late_eta_amplitude,
                       s.entangled_intervals, s.late_entangled);
  }
}

}  // namespace oscbath
