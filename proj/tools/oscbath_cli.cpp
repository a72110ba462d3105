// Command-line front end: run, sweep, threshold, preset, dump-coefficients.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "oscbath/error.hpp"
#include "oscbath/runner.hpp"

namespace fs = std::filesystem;
using namespace oscbath;

namespace {

struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::optional<double> dt;
  std::optional<double> t_max;
  bool no_plots = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_config = true) {
  if (with_config) cmd->add_option("--config", o.config_path, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--dt", o.dt, "integration step");
  cmd->add_option("--tmax", o.t_max, "final time");
  cmd->add_flag("--no-plots", o.no_plots, "skip the SVG plot");
}

RunConfig effective_config(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  if (o.dt) {
    c.dt = *o.dt;
    c.sample_dt = std::max(c.sample_dt, c.dt);
  }
  if (o.t_max) c.t_max = *o.t_max;
  if (o.no_plots) c.write_plot = false;
  return c;
}

void write_file(const fs::path& path, auto&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, fmt::format("cannot write '{}'", path.string()));
  writer(out);
  if (!out.flush()) throw Error(Errc::io_failure, fmt::format("write to '{}' failed", path.string()));
}

// Strict comma-list parsing; CLI11's own splitting turns '' into 0 and drops empty items.
std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) {
      throw Error(Errc::config_invalid, fmt::format("--values: '{}' is not a number", item));
    }
    out.push_back(v);
  }
  if (!text.empty() && text.back() == ',') throw Error(Errc::config_invalid, "--values ends with an empty item");
  return out;
}

void print_summary(const std::string& label, const RunSummary& s) {
  fmt::print("{}: late min eta {:.6e}, late best variance {:.6f}, entangled intervals {}, late {}\n", label,
             s.late_mean_min_eta, s.late_mean_best_variance, s.entangled_intervals,
             s.late_entangled ? "entangled" : "separable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance dynamics of N oscillators in a common non-Markovian bath"};
  app.require_subcommand(1);

  Overrides run_o;
  auto* run_cmd = app.add_subcommand("run", "simulate one configuration and write CSV/SVG outputs");
  add_common(run_cmd, run_o);

  Overrides sweep_o;
  std::string sweep_param;
  std::string sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "late-time summary over a list of parameter values");
  add_common(sweep_cmd, sweep_o);
  sweep_cmd->add_option("--param", sweep_param, "r, r0, rs, gamma0, lambda or temperature")->required();
  sweep_cmd->add_option("--values", sweep_values, "values (comma separated)");

  Overrides thr_o;
  double r_lo = 1.0, r_hi = 2.0, tolerance = 1e-3;
  auto* thr_cmd = app.add_subcommand("threshold", "bisect the late-time entanglement threshold in r");
  add_common(thr_cmd, thr_o);
  thr_cmd->add_option("--lo", r_lo, "lower bracket")->capture_default_str();
  thr_cmd->add_option("--hi", r_hi, "upper bracket")->capture_default_str();
  thr_cmd->add_option("--tol", tolerance, "bracket width")->capture_default_str();

  Overrides preset_o;
  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "reproduce a figure scenario (fig2, fig3, fig4, fig5)");
  add_common(preset_cmd, preset_o, false);
  preset_cmd->add_option("name", preset_name, "preset name")->required();

  Overrides coef_o;
  auto* coef_cmd = app.add_subcommand("dump-coefficients", "write the master-equation coefficient table");
  add_common(coef_cmd, coef_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      const auto result = run(effective_config(run_o));
      print_summary("run", result.summary);
      for (const auto& f : result.files) fmt::print("wrote {}\n", f.string());
      return 0;
    }
    if (*sweep_cmd) {
      SweepSpec spec{sweep_param, parse_values(sweep_values), effective_config(sweep_o)};
      const auto rows = sweep(spec);
      const fs::path dir(spec.base.output_dir);
      fs::create_directories(dir);
      write_file(dir / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, spec.parameter, rows); });
      write_sweep_csv(std::cout, spec.parameter, rows);
      const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok; });
      if (!any_ok) {
        fmt::print(stderr, "error: every sweep row failed\n");
        return 3;
      }
      return 0;
    }
    if (*thr_cmd) {
      const auto t = threshold_find(effective_config(thr_o), r_lo, r_hi, tolerance);
      fmt::print("threshold r = {:.6f} (bracket [{:.6f}, {:.6f}], {} runs, t_max = {})\n", t.r, t.lo, t.hi,
                 t.evaluations, t.t_max);
      return 0;
    }
    if (*preset_cmd) {
      const auto runs = preset_runs(preset_name);
      const fs::path root = fs::path(preset_o.out_dir.empty() ? "out" : preset_o.out_dir) / preset_name;
      std::vector<std::pair<std::string, RunSummary>> rows;
      for (auto p : runs) {
        if (preset_o.dt) {
          p.config.dt = *preset_o.dt;
          p.config.sample_dt = std::max(p.config.sample_dt, p.config.dt);
        }
        if (preset_o.t_max) p.config.t_max = *preset_o.t_max;
        if (preset_o.no_plots) p.config.write_plot = false;
        p.config.output_dir = (root / p.label).string();
        const auto result = run(p.config);
        print_summary(p.label, result.summary);
        rows.emplace_back(p.label, result.summary);
      }
      write_file(root / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, rows); });
      fmt::print("wrote {}\n", (root / "summary.csv").string());
      return 0;
    }
    if (*coef_cmd) {
      const RunConfig c = effective_config(coef_o);
      c.validate();
      const auto table = build_coefficient_table(c.bath, effective_frequencies(c.system), c.system.mass, c.t_max,
                                                 c.table_spacing());
      const fs::path dir(c.output_dir);
      fs::create_directories(dir);
      write_file(dir / "coefficients.csv", [&](std::ostream& o) { write_coefficients_csv(o, table, c.sample_dt); });
      fmt::print("wrote {}\n", (dir / "coefficients.csv").string());
      return 0;
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 0;
}
