#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "oscbath/bath.hpp"
#include "oscbath/error.hpp"

using namespace oscbath;

namespace {

BathSpec defaults() { return BathSpec{}; }

CoefficientTable default_table(double t_max = 3.0) {
  const BathSpec spec;
  return build_coefficient_table(spec, {1.0, 1.0}, 1.0, t_max, 2.5e-4);
}

}  // namespace

TEST_SUITE("bath") {
  TEST_CASE("spectral density values") {
    const auto spec = defaults();
    CHECK(spectral_density(0.0, spec, 1.0) == 0.0);
    CHECK(spectral_density(-1.0, spec, 1.0) == 0.0);
    const double expected = (2.0 / std::numbers::pi) * 0.05 * 1.0 * std::exp(-1e-4);
    CHECK(spectral_density(1.0, spec, 1.0) == doctest::Approx(expected).epsilon(1e-14));
    BathSpec super = spec;
    super.ohmicity = 3.0;
    CHECK(spectral_density(50.0, super, 2.0) ==
          doctest::Approx((2.0 / std::numbers::pi) * 0.05 * 50.0 * 2.0 * 0.25 * std::exp(-0.25)).epsilon(1e-14));
  }

  TEST_CASE("thermal occupation") {
    CHECK(mean_occupation(1.0, 10.0) == doctest::Approx(9.5083).epsilon(1e-5));
    CHECK(mean_occupation(1.0, 0.0) == 0.0);
    CHECK(mean_occupation(2.0, 1.0) == doctest::Approx(oracle::bose(2.0, 1.0)));
    // high-temperature limit T/ω − ½
    CHECK(mean_occupation(1e-3, 10.0) == doctest::Approx(1e4 - 0.5).epsilon(1e-9));
  }

  TEST_CASE("noise integrand has the classical limit at zero frequency") {
    const auto spec = defaults();
    CHECK(noise_integrand(0.0, spec, 1.0) == doctest::Approx(4.0 / std::numbers::pi * 0.05 * 10.0).epsilon(1e-14));
    CHECK(noise_integrand(1e-7, spec, 1.0) == doctest::Approx(noise_integrand(0.0, spec, 1.0)).epsilon(1e-12));
    const double w = 3.0;
    CHECK(noise_integrand(w, spec, 1.0) ==
          doctest::Approx(spectral_density(w, spec, 1.0) * (1.0 + 2.0 * mean_occupation(w, 10.0))).epsilon(1e-13));
  }

  TEST_CASE("dissipation kernel matches the Ohmic closed form") {
    const auto spec = defaults();
    for (int k = 1; k <= 20; ++k) {
      const double t = 0.0025 * k;
      const double exact = oracle::ohmic_pi(t, spec.gamma0, spec.cutoff, 1.0);
      CHECK(dissipation_kernel(t, spec, 1.0) == doctest::Approx(exact).epsilon(1e-8));
    }
    CHECK(dissipation_kernel(0.0, spec, 1.0) == 0.0);
    CHECK(dissipation_kernel(-0.01, spec, 1.0) == doctest::Approx(-dissipation_kernel(0.01, spec, 1.0)));
  }

  TEST_CASE("dissipation kernel scales with mass and cutoff as the closed form") {
    BathSpec spec = defaults();
    spec.cutoff = 30.0;
    spec.gamma0 = 0.7;
    for (double t : {0.01, 0.05, 0.1}) {
      CHECK(dissipation_kernel(t, spec, 2.5) ==
            doctest::Approx(oracle::ohmic_pi(t, 0.7, 30.0, 2.5)).epsilon(1e-8));
    }
  }

  TEST_CASE("zero-temperature noise kernel matches the Dawson-function closed form") {
    BathSpec spec = defaults();
    spec.temperature = 0.0;
    for (double t : {0.0, 0.003, 0.01, 0.02, 0.05, 0.1, 0.3}) {
      const double exact = oracle::ohmic_nu_zero_temperature(t, spec.gamma0, spec.cutoff, 1.0);
      CHECK(noise_kernel(t, spec, 1.0) == doctest::Approx(exact).epsilon(1e-7).scale(1e-3));
    }
    CHECK(noise_kernel(-0.02, spec, 1.0) == noise_kernel(0.02, spec, 1.0));
  }

  TEST_CASE("counterterm equals (2/M) times the integral of J over omega") {
    for (double n : {1.0, 2.0, 3.0}) {
      BathSpec spec = defaults();
      spec.ohmicity = n;
      const double m = 1.7;
      const double integral = oracle::simpson(
          [&](double w) { return w > 0 ? spectral_density(w, spec, m) / w : (n == 1.0 ? 2 / std::numbers::pi * 0.05 * m : 0.0); },
          0.0, 10.0 * spec.cutoff, 200000);
      CHECK(frequency_counterterm(spec) == doctest::Approx(2.0 / m * integral).epsilon(1e-8));
    }
  }

  TEST_CASE("coefficients vanish at t = 0") {
    const auto table = default_table(1.0);
    const auto s = table.at(0.0);
    CHECK(s.omega_shift_sq == 0.0);
    CHECK(s.gamma_n == 0.0);
    CHECK(s.d_n == 0.0);
    CHECK(s.f_n == 0.0);
  }

  TEST_CASE("coefficient plateaus") {
    const auto table = default_table(5.0);
    const double cut = std::exp(-1e-4);
    const double d_ref = 0.05 * (1.0 + 2.0 * mean_occupation(1.0, 10.0)) * cut;
    for (double t = 1.0; t <= 5.0; t += 0.25) {
      const auto s = table.at(t);
      CHECK(s.gamma_n == doctest::Approx(0.05 * cut).epsilon(0.01));
      CHECK(s.d_n == doctest::Approx(d_ref).epsilon(0.01));
    }
    CHECK(table.horizon() < 5.0);
    CHECK(table.counterterm() == doctest::Approx(frequency_counterterm(BathSpec{})));
  }

  TEST_CASE("coefficients agree with the swapped-order oracle") {
    const BathSpec spec;
    const auto table = default_table(1.0);
    for (double t : {0.005, 0.02, 0.06, 0.3}) {
      const auto o = oracle::swapped_order_coefficients(t, spec.gamma0, spec.cutoff, spec.temperature, 1.0, 1.0);
      const auto s = table.at(t);
      CAPTURE(t);
      CHECK(s.omega_shift_sq == doctest::Approx(o.omega_shift_sq).epsilon(1e-6).scale(1.0));
      CHECK(s.gamma_n == doctest::Approx(o.gamma_n).epsilon(1e-6).scale(1e-3));
      CHECK(s.d_n == doctest::Approx(o.d_n).epsilon(1e-6).scale(1e-2));
      CHECK(s.f_n == doctest::Approx(o.f_n).epsilon(1e-6).scale(1.0));
    }
  }

  TEST_CASE("damping coefficient is non-negative for the Ohmic bath") {
    const auto table = default_table(2.0);
    for (const auto& s : table.samples()) CHECK(s.gamma_n >= -1e-15);
  }

  TEST_CASE("grid refinement changes the table very little") {
    const BathSpec spec;
    const auto coarse = build_coefficient_table(spec, {1.0, 1.0}, 1.0, 1.0, 5e-4);
    const auto fine = build_coefficient_table(spec, {1.0, 1.0}, 1.0, 1.0, 2.5e-4);
    for (double t : {0.01, 0.1, 0.5, 1.0}) {
      CHECK(coarse.at(t).gamma_n == doctest::Approx(fine.at(t).gamma_n).epsilon(1e-7));
      CHECK(coarse.at(t).d_n == doctest::Approx(fine.at(t).d_n).epsilon(1e-7));
    }
  }

  TEST_CASE("parallel and serial tables are bit-identical") {
    const BathSpec spec;
    const auto a = build_coefficient_table(spec, {0.9, 1.2}, 1.0, 1.0, 5e-4);
    const auto b = build_coefficient_table_serial(spec, {0.9, 1.2}, 1.0, 1.0, 5e-4);
    REQUIRE(a.samples().size() == b.samples().size());
    for (std::size_t k = 0; k < a.samples().size(); ++k) {
      CHECK(a.samples()[k].omega_shift_sq == b.samples()[k].omega_shift_sq);
      CHECK(a.samples()[k].gamma_n == b.samples()[k].gamma_n);
      CHECK(a.samples()[k].d_n == b.samples()[k].d_n);
      CHECK(a.samples()[k].f_n == b.samples()[k].f_n);
    }
  }

  TEST_CASE("interpolation reproduces grid values and stays in range") {
    const auto table = default_table(1.0);
    for (std::size_t k : {std::size_t{3}, std::size_t{50}, std::size_t{400}}) {
      const double t = table.spacing() * static_cast<double>(k);
      CHECK(table.at(t).gamma_n == doctest::Approx(table.samples()[k].gamma_n).epsilon(1e-12));
    }
    CHECK_THROWS_AS(table.at(1.5), Error);
    CHECK_THROWS_AS(table.at(-0.1), Error);
    try {
      table.at(2.0);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::time_out_of_range);
    }
  }

  TEST_CASE("coarse grids are refused") {
    const BathSpec spec;
    try {
      build_coefficient_table(spec, {1.0, 1.0}, 1.0, 1.0, 5e-3);
      FAIL("expected GridTooCoarse");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::grid_too_coarse);
    }
  }

  TEST_CASE("invalid bath parameters") {
    BathSpec spec;
    spec.cutoff = 0.0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = BathSpec{};
    spec.temperature = -1.0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = BathSpec{};
    spec.ohmicity = 0.5;
    CHECK(spec.warnings().size() == 1);
    spec.temperature = 0.0;
    CHECK(spec.warnings().empty());
  }

  TEST_CASE("coefficient CSV layout") {
    const auto table = default_table(0.1);
    std::ostringstream out;
    write_coefficients_csv(out, table, 0.01);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,omega_shift_sq,gamma_n,d_n,f_n");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 11);
  }
}
