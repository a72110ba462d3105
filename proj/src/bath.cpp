#include "oscbath/bath.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>

#include "oscbath/error.hpp"

namespace oscbath {
namespace {

constexpr double kDomainInCutoffs = 8.0;
constexpr double kEpsAbs = 1e-10;
constexpr double kEpsRel = 1e-12;
constexpr std::size_t kWorkspaceLimit = 20000;
constexpr std::size_t kQawoLevels = 40;

void disable_gsl_abort() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};
struct QawoTableDeleter {
  void operator()(gsl_integration_qawo_table* t) const { gsl_integration_qawo_table_free(t); }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;
using QawoTable = std::unique_ptr<gsl_integration_qawo_table, QawoTableDeleter>;

// x·coth(x), finite at x = 0.
double x_coth_x(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 + x2 / 3.0 - x2 * x2 / 45.0;
  }
  return x / std::tanh(x);
}

struct IntegrandContext {
  const BathSpec* spec;
  double mass;
};

double gsl_spectral_density(double omega, void* params) {
  const auto* ctx = static_cast<const IntegrandContext*>(params);
  return spectral_density(omega, *ctx->spec, ctx->mass);
}

double gsl_noise_integrand(double omega, void* params) {
  const auto* ctx = static_cast<const IntegrandContext*>(params);
  return noise_integrand(omega, *ctx->spec, ctx->mass);
}

// ∫₀^{8Λ} g(ω)·weight(ωt) dω with weight = sin or cos.
double oscillatory_integral(double (*g)(double, void*), const BathSpec& spec, double mass, double t,
                            enum gsl_integration_qawo_enum weight) {
  disable_gsl_abort();
  IntegrandContext ctx{&spec, mass};
  gsl_function f{g, &ctx};
  // 1e−10 absolute at the reference coupling; strong baths have kernels ~1e4
  // where that is below double round-off, so the floor scales with γ0·M·Λ².
  const double epsabs = std::max(kEpsAbs, 2e-13 * spec.gamma0 * mass * spec.cutoff * spec.cutoff);
  const double length = kDomainInCutoffs * spec.cutoff;
  Workspace ws(gsl_integration_workspace_alloc(kWorkspaceLimit));
  double result = 0.0;
  double abserr = 0.0;
  int status = 0;
  if (t == 0.0) {
    if (weight == GSL_INTEG_SINE) return 0.0;
    status = gsl_integration_qags(&f, 0.0, length, epsabs, kEpsRel, kWorkspaceLimit, ws.get(), &result, &abserr);
  } else {
    QawoTable table(gsl_integration_qawo_table_alloc(t, length, weight, kQawoLevels));
    status = gsl_integration_qawo(&f, 0.0, epsabs, kEpsRel, kWorkspaceLimit, ws.get(), table.get(), &result,
                                  &abserr);
  }
  if (status != GSL_SUCCESS || !std::isfinite(result)) {
    throw Error(Errc::quadrature_failure,
                fmt::format("kernel quadrature at t={} did not converge ({}; abserr={:.3e})", t, gsl_strerror(status),
                            abserr));
  }
  return result;
}

}  // namespace

void BathSpec::validate() const {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw Error(Errc::invalid_parameter, "cutoff must be > 0");
  if (!(gamma0 >= 0.0) || !std::isfinite(gamma0)) throw Error(Errc::invalid_parameter, "gamma0 must be >= 0");
  if (!(ohmicity > 0.0) || !std::isfinite(ohmicity)) throw Error(Errc::invalid_parameter, "ohmicity must be > 0");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw Error(Errc::invalid_parameter, "temperature must be >= 0");
  }
}

std::vector<std::string> BathSpec::warnings() const {
  std::vector<std::string> out;
  if (ohmicity < 1.0 && temperature > 0.0) {
    out.push_back(fmt::format(
        "sub-Ohmic bath (n={}) at T={}: the thermal noise integrand diverges like w^(n-1) at w=0", ohmicity,
        temperature));
  }
  return out;
}

double spectral_density(double omega, const BathSpec& spec, double mass) {
  if (omega <= 0.0) return 0.0;
  const double x = omega / spec.cutoff;
  return (2.0 / std::numbers::pi) * spec.gamma0 * omega * mass * std::pow(x, spec.ohmicity - 1.0) *
         std::exp(-x * x);
}

double mean_occupation(double omega, double temperature) {
  if (temperature <= 0.0) return 0.0;
  return 1.0 / std::expm1(omega / temperature);
}

double noise_integrand(double omega, const BathSpec& spec, double mass) {
  // J(ω)·coth(ω/2T) = (2/π) γ0 M (ω/Λ)^{n−1} e^{−ω²/Λ²} · ω coth(ω/2T)
  const double x = omega / spec.cutoff;
  const double prefactor = (2.0 / std::numbers::pi) * spec.gamma0 * mass * std::exp(-x * x);
  double w_coth;
  if (spec.temperature <= 0.0) {
    w_coth = omega;
  } else {
    w_coth = 2.0 * spec.temperature * x_coth_x(omega / (2.0 * spec.temperature));
  }
  if (omega <= 0.0) {
    if (spec.ohmicity == 1.0) return prefactor * w_coth;
    if (spec.ohmicity > 1.0 || spec.temperature <= 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  return prefactor * std::pow(x, spec.ohmicity - 1.0) * w_coth;
}

double dissipation_kernel(double t, const BathSpec& spec, double mass) {
  if (t < 0.0) return -dissipation_kernel(-t, spec, mass);
  return oscillatory_integral(gsl_spectral_density, spec, mass, t, GSL_INTEG_SINE);
}

double noise_kernel(double t, const BathSpec& spec, double mass) {
  return oscillatory_integral(gsl_noise_integrand, spec, mass, std::abs(t), GSL_INTEG_COSINE);
}

double frequency_counterterm(const BathSpec& spec) {
  return (2.0 / std::numbers::pi) * spec.gamma0 * spec.cutoff * std::tgamma(0.5 * spec.ohmicity);
}

CoefficientTable::CoefficientTable(double spacing, double t_max, double counterterm,
                                   std::vector<CoefficientSample> samples)
    : spacing_(spacing), t_max_(t_max), counterterm_(counterterm), samples_(std::move(samples)) {}

CoefficientSample CoefficientTable::at(double t) const {
  const double slack = 1e-9 * std::max(1.0, t_max_);
  if (!(t >= -slack && t <= t_max_ + slack) || samples_.empty()) {
    throw Error(Errc::time_out_of_range, fmt::format("t={} outside coefficient table [0, {}]", t, t_max_));
  }
  const auto n = static_cast<std::ptrdiff_t>(samples_.size());
  const double u = std::max(t, 0.0) / spacing_;
  if (u >= static_cast<double>(n - 1)) return samples_.back();
  // Four-point stencil [i0, i0+3] containing u, clamped to the table.
  auto i = static_cast<std::ptrdiff_t>(u);
  const std::ptrdiff_t i0 = std::clamp<std::ptrdiff_t>(i - 1, 0, std::max<std::ptrdiff_t>(n - 4, 0));
  const std::ptrdiff_t m = std::min<std::ptrdiff_t>(4, n);
  double w[4];
  for (std::ptrdiff_t a = 0; a < m; ++a) {
    double l = 1.0;
    for (std::ptrdiff_t b = 0; b < m; ++b) {
      if (b != a) l *= (u - static_cast<double>(i0 + b)) / static_cast<double>(a - b);
    }
    w[a] = l;
  }
  CoefficientSample out;
  for (std::ptrdiff_t a = 0; a < m; ++a) {
    const auto& s = samples_[static_cast<std::size_t>(i0 + a)];
    out.omega_shift_sq += w[a] * s.omega_shift_sq;
    out.gamma_n += w[a] * s.gamma_n;
    out.d_n += w[a] * s.d_n;
    out.f_n += w[a] * s.f_n;
  }
  return out;
}

double CoefficientTable::omega_bar_sq(double t, double omega_n) const {
  return omega_n * omega_n + at(t).omega_shift_sq + counterterm_;
}

namespace {

template <bool Parallel>
CoefficientTable build_table(const BathSpec& spec, const EffectiveFrequencies& freqs, double mass, double t_max,
                             double dt, const TableOptions& options) {
  spec.validate();
  if (!(t_max > 0.0) || !(dt > 0.0)) throw Error(Errc::invalid_parameter, "t_max and dt must be positive");
  const double limit = std::min(0.1 / spec.cutoff, 0.01 / freqs.omega_n);
  if (dt > limit) {
    throw Error(Errc::grid_too_coarse,
                fmt::format("table dt={} exceeds min(0.1/cutoff, 0.01/omega_n)={}", dt, limit));
  }

  const auto intervals = static_cast<std::ptrdiff_t>(std::ceil(t_max / dt - 1e-9));
  const std::ptrdiff_t sub_points = 2 * intervals + 1;  // Simpson sub-grid, step dt/2
  const double h = 0.5 * dt;
  const double window = 2.0 / spec.cutoff;
  const double min_horizon = 20.0 / spec.cutoff;

  std::vector<double> pi_vals;
  std::vector<double> nu_vals;
  pi_vals.reserve(static_cast<std::size_t>(std::min<std::ptrdiff_t>(sub_points, 1 << 16)));
  nu_vals.reserve(pi_vals.capacity());

  double pi_peak = 0.0;
  double nu_peak = 0.0;
  double last_significant = 0.0;
  std::ptrdiff_t evaluated = 0;
  const std::ptrdiff_t batch = std::max(options.batch, 2);

  while (evaluated < sub_points) {
    const std::ptrdiff_t begin = evaluated;
    const std::ptrdiff_t end = std::min(sub_points, begin + batch);
    pi_vals.resize(static_cast<std::size_t>(end));
    nu_vals.resize(static_cast<std::size_t>(end));

    bool failed = false;
    std::string failure;
#pragma omp parallel for schedule(dynamic, 4) if (Parallel)
    for (std::ptrdiff_t k = begin; k < end; ++k) {
      const double s = h * static_cast<double>(k);
      try {
        pi_vals[static_cast<std::size_t>(k)] = dissipation_kernel(s, spec, mass);
        nu_vals[static_cast<std::size_t>(k)] = noise_kernel(s, spec, mass);
      } catch (const Error& e) {
#pragma omp critical(oscbath_table_failure)
        {
          failed = true;
          failure = e.what();
        }
      }
    }
    if (failed) throw Error(Errc::quadrature_failure, failure);

    for (std::ptrdiff_t k = begin; k < end; ++k) {
      pi_peak = std::max(pi_peak, std::abs(pi_vals[static_cast<std::size_t>(k)]));
      nu_peak = std::max(nu_peak, std::abs(nu_vals[static_cast<std::size_t>(k)]));
    }
    for (std::ptrdiff_t k = begin; k < end; ++k) {
      const double tol_pi = options.horizon_tolerance * pi_peak;
      const double tol_nu = options.horizon_tolerance * nu_peak;
      if (std::abs(pi_vals[static_cast<std::size_t>(k)]) > tol_pi ||
          std::abs(nu_vals[static_cast<std::size_t>(k)]) > tol_nu) {
        last_significant = h * static_cast<double>(k);
      }
    }
    evaluated = end;
    const double reached = h * static_cast<double>(evaluated - 1);
    if (reached > min_horizon && reached - last_significant > window) break;
  }

  // Whole Simpson panels only.
  const std::ptrdiff_t panels = (evaluated - 1) / 2;
  std::vector<CoefficientSample> samples(static_cast<std::size_t>(panels + 1));
  const double wn = freqs.omega_n;
  auto integrands = [&](std::ptrdiff_t k) {
    const double s = h * static_cast<double>(k);
    const double c = std::cos(wn * s);
    const double sn = std::sin(wn * s);
    const double pi_k = pi_vals[static_cast<std::size_t>(k)];
    const double nu_k = nu_vals[static_cast<std::size_t>(k)];
    return CoefficientSample{-(2.0 / mass) * c * pi_k, sn * pi_k / (mass * wn), c * nu_k, -sn * nu_k / (mass * wn)};
  };
  CoefficientSample acc;
  for (std::ptrdiff_t p = 1; p <= panels; ++p) {
    const auto a = integrands(2 * p - 2);
    const auto b = integrands(2 * p - 1);
    const auto c = integrands(2 * p);
    const double w = dt / 6.0;
    acc.omega_shift_sq += w * (a.omega_shift_sq + 4.0 * b.omega_shift_sq + c.omega_shift_sq);
    acc.gamma_n += w * (a.gamma_n + 4.0 * b.gamma_n + c.gamma_n);
    acc.d_n += w * (a.d_n + 4.0 * b.d_n + c.d_n);
    acc.f_n += w * (a.f_n + 4.0 * b.f_n + c.f_n);
    samples[static_cast<std::size_t>(p)] = acc;
  }

  for (const auto& s : samples) {
    if (!std::isfinite(s.omega_shift_sq) || !std::isfinite(s.gamma_n) || !std::isfinite(s.d_n) ||
        !std::isfinite(s.f_n)) {
      throw Error(Errc::quadrature_failure, "non-finite master-equation coefficient");
    }
  }
  const double counterterm = spec.renormalize ? frequency_counterterm(spec) : 0.0;
  return CoefficientTable(dt, t_max, counterterm, std::move(samples));
}

}  // namespace

CoefficientTable build_coefficient_table(const BathSpec& spec, const EffectiveFrequencies& freqs, double mass,
                                         double t_max, double dt, const TableOptions& options) {
  return build_table<true>(spec, freqs, mass, t_max, dt, options);
}

CoefficientTable build_coefficient_table_serial(const BathSpec& spec, const EffectiveFrequencies& freqs, double mass,
                                                double t_max, double dt, const TableOptions& options) {
  return build_table<false>(spec, freqs, mass, t_max, dt, options);
}

void write_coefficients_csv(std::ostream& out, const CoefficientTable& table, double output_dt) {
  out << "t,omega_shift_sq,gamma_n,d_n,f_n\n";
  const auto rows = static_cast<std::ptrdiff_t>(std::floor(table.t_max() / output_dt + 1e-9));
  for (std::ptrdiff_t i = 0; i <= rows; ++i) {
    const double t = output_dt * static_cast<double>(i);
    const auto s = table.at(t);
    out << fmt::format("{:.10g},{:.16e},{:.16e},{:.16e},{:.16e}\n", t, s.omega_shift_sq, s.gamma_n, s.d_n, s.f_n);
  }
}

}  // namespace oscbath
