#include "oscbath/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "oscbath/error.hpp"

namespace oscbath {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"system", {"n_modes", "mass", "omega", "lambda"}},
      {"bath", {"gamma0", "cutoff", "ohmicity", "temperature", "renormalize"}},
      {"state", {"family", "r", "r0", "rs"}},
      {"run", {"t_max", "dt", "sample_dt", "engine"}},
      {"outputs", {"trajectory", "entanglement", "coefficients", "plot", "dir"}},
  };
  return keys;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::config_invalid, what); }

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    invalid(fmt::format("{}: '{}' is not a number", key, text));
  }
  if (used != text.size() || !std::isfinite(value)) invalid(fmt::format("{}: '{}' is not a finite number", key, text));
  return value;
}

int to_int(const std::string& key, const std::string& text) {
  const double value = to_double(key, text);
  if (value != std::floor(value) || std::abs(value) > 1e6) invalid(fmt::format("{}: '{}' is not an integer", key, text));
  return static_cast<int>(value);
}

bool to_bool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  invalid(fmt::format("{}: '{}' is not a boolean", key, text));
}

}  // namespace

const char* to_string(StateFamily family) noexcept {
  return family == StateFamily::ghz ? "ghz" : "asymmetric";
}

const char* to_string(Engine engine) noexcept { return engine == Engine::lyapunov ? "lyapunov" : "block"; }

void RunConfig::validate() const {
  system.validate();
  bath.validate();
  if (!(t_max > 0.0)) invalid("run.t_max must be > 0");
  if (!(dt > 0.0)) invalid("run.dt must be > 0");
  if (!(sample_dt >= dt)) invalid("run.sample_dt must be >= run.dt");
  const double ratio = sample_dt / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) invalid("run.sample_dt must be a multiple of run.dt");
  const auto freqs = effective_frequencies(system);
  const double step_limit = 0.05 / std::max(freqs.omega_n, freqs.omega_f);
  if (dt > step_limit) {
    throw Error(Errc::step_too_large, fmt::format("run.dt={} exceeds 0.05/max(omega)={}", dt, step_limit));
  }
  if (family == StateFamily::ghz) {
    if (system.n_modes != 2 && system.n_modes != 3) {
      throw Error(Errc::unsupported_mode_count, "the ghz family is defined for 2 or 3 modes");
    }
    if (!(ghz.r >= 0.0)) invalid("state.r must be >= 0");
  } else {
    if (system.n_modes != 3) throw Error(Errc::unsupported_mode_count, "the asymmetric family needs 3 modes");
    if (!(asymmetric.r0 >= 0.0) || !(asymmetric.rs >= 0.0)) invalid("state.r0 and state.rs must be >= 0");
  }
  if (output_dir.empty()) invalid("outputs.dir must not be empty");
}

CovarianceState RunConfig::initial_state() const {
  if (family == StateFamily::ghz) return ghz_initial_covariance({system.n_modes, ghz.r});
  return asymmetric_initial_covariance(asymmetric);
}

double RunConfig::table_spacing() const {
  const auto freqs = effective_frequencies(system);
  return std::min({dt, 0.025 / bath.cutoff, 0.01 / freqs.omega_n});
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    invalid(fmt::format("line {}: {}", e.line(), e.message()));
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (!body.data().empty()) invalid(fmt::format("key '{}' outside any section", section));
      invalid(fmt::format("unknown section [{}]", section));
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) invalid(fmt::format("unknown key {}.{}", section, key));
    }
  }

  RunConfig c;
  auto get = [&](const std::string& path) { return tree.get_optional<std::string>(pt::ptree::path_type(path, '.')); };
  if (auto v = get("system.n_modes")) c.system.n_modes = to_int("system.n_modes", *v);
  if (auto v = get("system.mass")) c.system.mass = to_double("system.mass", *v);
  if (auto v = get("system.omega")) c.system.omega = to_double("system.omega", *v);
  if (auto v = get("system.lambda")) c.system.lambda = to_double("system.lambda", *v);
  if (auto v = get("bath.gamma0")) c.bath.gamma0 = to_double("bath.gamma0", *v);
  if (auto v = get("bath.cutoff")) c.bath.cutoff = to_double("bath.cutoff", *v);
  if (auto v = get("bath.ohmicity")) c.bath.ohmicity = to_double("bath.ohmicity", *v);
  if (auto v = get("bath.temperature")) c.bath.temperature = to_double("bath.temperature", *v);
  if (auto v = get("bath.renormalize")) c.bath.renormalize = to_bool("bath.renormalize", *v);
  if (auto v = get("state.family")) {
    if (*v == "ghz") {
      c.family = StateFamily::ghz;
    } else if (*v == "asymmetric") {
      c.family = StateFamily::asymmetric;
    } else {
      invalid(fmt::format("state.family must be ghz or asymmetric, got '{}'", *v));
    }
  }
  if (auto v = get("state.r")) c.ghz.r = to_double("state.r", *v);
  if (auto v = get("state.r0")) c.asymmetric.r0 = to_double("state.r0", *v);
  if (auto v = get("state.rs")) c.asymmetric.rs = to_double("state.rs", *v);
  if (auto v = get("run.t_max")) c.t_max = to_double("run.t_max", *v);
  if (auto v = get("run.dt")) c.dt = to_double("run.dt", *v);
  if (auto v = get("run.sample_dt")) c.sample_dt = to_double("run.sample_dt", *v);
  if (auto v = get("run.engine")) {
    if (*v == "lyapunov") {
      c.engine = Engine::lyapunov;
    } else if (*v == "block") {
      c.engine = Engine::block;
    } else {
      invalid(fmt::format("run.engine must be lyapunov or block, got '{}'", *v));
    }
  }
  if (auto v = get("outputs.trajectory")) c.write_trajectory = to_bool("outputs.trajectory", *v);
  if (auto v = get("outputs.entanglement")) c.write_entanglement = to_bool("outputs.entanglement", *v);
  if (auto v = get("outputs.coefficients")) c.write_coefficients = to_bool("outputs.coefficients", *v);
  if (auto v = get("outputs.plot")) c.write_plot = to_bool("outputs.plot", *v);
  if (auto v = get("outputs.dir")) c.output_dir = *v;
  c.ghz.n_modes = c.system.n_modes;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_invalid, fmt::format("cannot open config file '{}'", path.string()));
  return parse_config(in);
}

void dump_config(std::ostream& out, const RunConfig& c) {
  out << "[system]\n"
      << fmt::format("n_modes = {}\nmass = {}\nomega = {}\nlambda = {}\n\n", c.system.n_modes, c.system.mass,
                     c.system.omega, c.system.lambda)
      << "[bath]\n"
      << fmt::format("gamma0 = {}\ncutoff = {}\nohmicity = {}\ntemperature = {}\nrenormalize = {}\n\n",
                     c.bath.gamma0, c.bath.cutoff, c.bath.ohmicity, c.bath.temperature, c.bath.renormalize)
      << "[state]\n"
      << fmt::format("family = {}\nr = {}\nr0 = {}\nrs = {}\n\n", to_string(c.family), c.ghz.r, c.asymmetric.r0,
                     c.asymmetric.rs)
      << "[run]\n"
      << fmt::format("t_max = {}\ndt = {}\nsample_dt = {}\nengine = {}\n\n", c.t_max, c.dt, c.sample_dt,
                     to_string(c.engine))
      << "[outputs]\n"
      << fmt::format("trajectory = {}\nentanglement = {}\ncoefficients = {}\nplot = {}\ndir = {}\n",
                     c.write_trajectory, c.write_entanglement, c.write_coefficients, c.write_plot, c.output_dir);
}

}  // namespace oscbath
