#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "oscbath/entanglement.hpp"
#include "oscbath/error.hpp"
#include "oscbath/states.hpp"

using namespace oscbath;

namespace {

CovarianceState vacuum(int n, Basis basis = Basis::bare) {
  return {0.0, 0.5 * Eigen::MatrixXd::Identity(2 * n, 2 * n), basis};
}

double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Minimum of (L A Lᵀ)_qq + (L B Lᵀ)_pp over L ∈ SL(2,R), by grid search and
// compass refinement over L = R(a)·diag(e^s, e^{−s})·R(b).
double brute_force_uniform(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
  auto rot = [](double x) {
    Eigen::Matrix2d r;
    r << std::cos(x), -std::sin(x), std::sin(x), std::cos(x);
    return r;
  };
  auto value = [&](double x, double s, double y) {
    const Eigen::Matrix2d l = rot(x) * Eigen::Vector2d(std::exp(s), std::exp(-s)).asDiagonal() * rot(y);
    return (l * a * l.transpose())(0, 0) + (l * b * l.transpose())(1, 1);
  };
  double bx = 0, bs = 0, by = 0, best = value(0, 0, 0);
  for (int i = 0; i < 48; ++i)
    for (int j = -40; j <= 40; ++j)
      for (int k = 0; k < 48; ++k) {
        const double x = i * std::numbers::pi / 48, s = 0.05 * j, y = k * std::numbers::pi / 48;
        const double v = value(x, s, y);
        if (v < best) best = v, bx = x, bs = s, by = y;
      }
  for (double step = 0.05; step > 1e-10; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (int d = 0; d < 6; ++d) {
        double x = bx, s = bs, y = by;
        const double sign = d % 2 ? -step : step;
        (d < 2 ? x : d < 4 ? s : y) += sign;
        const double v = value(x, s, y);
        if (v < best) best = v, bx = x, bs = s, by = y, moved = true;
      }
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("entanglement") {
  TEST_CASE("basis changes") {
    const auto vac = vacuum(3, Basis::transformed);
    CHECK(max_diff(to_bare_basis(vac).matrix, vac.matrix) < 1e-15);
    const auto v = asymmetric_initial_covariance({1.0, 1.489});
    const auto back = to_transformed_basis(to_bare_basis(v));
    CHECK(max_diff(back.matrix, v.matrix) < 1e-12);
    CHECK(back.basis == Basis::transformed);
    CHECK_THROWS_AS(to_transformed_basis(v), Error);
    CHECK_THROWS_AS(to_bare_basis(to_bare_basis(v)), Error);
  }

  TEST_CASE("GHZ bare covariance is permutation symmetric with q-q and p-p correlations") {
    const auto b = to_bare_basis(ghz_initial_covariance({3, 1.0})).matrix;
    CHECK(std::abs(b(0, 2)) > 0.1);
    CHECK(std::abs(b(1, 3)) > 0.1);
    for (int perm = 0; perm < 3; ++perm) {
      const int i = perm, j = (perm + 1) % 3;
      CHECK(b(2 * i, 2 * i) == doctest::Approx(b(2 * j, 2 * j)).epsilon(1e-10));
      CHECK(b(2 * i + 1, 2 * i + 1) == doctest::Approx(b(2 * j + 1, 2 * j + 1)).epsilon(1e-10));
    }
    CHECK(b(0, 2) == doctest::Approx(b(2, 4)).epsilon(1e-10));
    CHECK(b(0, 2) == doctest::Approx(b(0, 4)).epsilon(1e-10));
    CHECK(std::abs(b(0, 3)) < 1e-12);
  }

  TEST_CASE("negativity of vacuum and two-mode squeezed vacuum") {
    CHECK(std::abs(negativity(vacuum(2), 0)) < 1e-14);
    CHECK(std::abs(negativity(vacuum(3), 2)) < 1e-14);
    for (double r : {0.1, 0.5, 1.0, 2.0}) {
      const CovarianceState s{0.0, oracle::two_mode_squeezed_vacuum(r), Basis::bare};
      const double expected = 0.5 * (std::exp(-2 * r) - 1.0);
      CHECK(negativity(s, 0) == doctest::Approx(expected).epsilon(1e-10));
      CHECK(negativity(s, 1) == doctest::Approx(expected).epsilon(1e-10));
    }
  }

  TEST_CASE("negativity agrees with the Jacobi eigensolver oracle") {
    const auto bare = to_bare_basis(asymmetric_initial_covariance({1.0, 1.489}));
    for (int j = 0; j < 3; ++j) {
      Eigen::MatrixXcd h = bare.matrix.cast<oracle::cplx>();
      Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(6, 6);
      gamma(2 * j + 1, 2 * j + 1) = -1.0;
      h = (gamma * bare.matrix * gamma).cast<oracle::cplx>() +
          oracle::cplx(0.0, 0.5) * symplectic_form(3).cast<oracle::cplx>();
      const auto ev = oracle::jacobi_eigenvalues(h);
      CHECK(negativity(bare, j) == doctest::Approx(ev.front()).epsilon(1e-10).scale(1.0));
    }
  }

  TEST_CASE("negativity is degenerate for the symmetric state") {
    for (double r : {0.5, 1.0, 2.0}) {
      const auto b = to_bare_basis(ghz_initial_covariance({3, r}));
      const double e0 = negativity(b, 0);
      CHECK(e0 < 0.0);
      CHECK(negativity(b, 1) == doctest::Approx(e0).epsilon(1e-10));
      CHECK(negativity(b, 2) == doctest::Approx(e0).epsilon(1e-10));
    }
  }

  TEST_CASE("negativity input checks") {
    CHECK_THROWS_AS(negativity(vacuum(2, Basis::transformed), 0), Error);
    CHECK_THROWS_AS(negativity(vacuum(2), 2), Error);
  }

  TEST_CASE("two-mode negativity survives relabeling the bare modes") {
    // For N = 2, swapping the bare modes only flips the sign of transformed mode 1,
    // and either transposition gives the same spectrum.
    for (double r : {0.3, 1.2}) {
      auto t = ghz_initial_covariance({2, r});
      t.matrix(0, 1) = t.matrix(1, 0) = 0.1;  // break the diagonal form
      const auto bare = to_bare_basis(t);
      Eigen::MatrixXd flip = Eigen::MatrixXd::Identity(4, 4);
      flip(0, 0) = flip(1, 1) = -1.0;
      CovarianceState flipped = t;
      flipped.matrix = flip * t.matrix * flip;
      const auto swapped = to_bare_basis(flipped);
      CHECK(swapped.matrix(0, 0) == doctest::Approx(bare.matrix(2, 2)));
      CHECK(negativity(swapped, 0) == doctest::Approx(negativity(bare, 0)).epsilon(1e-10));
      CHECK(negativity(bare, 1) == doctest::Approx(negativity(bare, 0)).epsilon(1e-10));
    }
  }

  TEST_CASE("squeeze match parameters: vacuum") {
    const auto p = squeeze_match_params(vacuum(3));
    CHECK(p.r1 == 0.0);
    CHECK(p.r2 == doctest::Approx(0.0).scale(1.0));
    CHECK(std::abs(p.m1) == 0.0);
    CHECK(p.m3 == 1.0);
    CHECK(p.m4 == 0.0);
    CHECK(p.phi_undefined);
    CHECK(p.h1 == doctest::Approx(std::abs(p.f1)));
    CHECK(p.h2 == doctest::Approx(-std::abs(p.f1)));
  }

  TEST_CASE("squeeze match parameters: uncorrelated single-mode squeezing") {
    const double r = 0.6;
    CovarianceState s = vacuum(3);
    s.matrix(0, 0) = 0.5 * std::exp(-2 * r);
    s.matrix(1, 1) = 0.5 * std::exp(2 * r);
    const auto p = squeeze_match_params(s);
    CHECK(p.m1.real() < 0.0);
    CHECK(std::abs(p.m1.imag()) < 1e-15);
    CHECK(p.phi == doctest::Approx(std::numbers::pi / 2));
    CHECK(std::exp(2 * p.r1) == doctest::Approx(std::exp(-2 * r)));
    // direct construction: m1 = ½(V11 − V22) = −½ sinh 2r, m3 = cosh 2r
    CHECK(p.m1.real() == doctest::Approx(-0.5 * std::sinh(2 * r)));
    CHECK(p.m3 == doctest::Approx(std::cosh(2 * r)));
    s.matrix(0, 1) = s.matrix(1, 0) = -1e-3;
    CHECK(squeeze_match_params(s).phi == doctest::Approx(std::numbers::pi / 2).epsilon(1e-2));
  }

  TEST_CASE("squeeze match parameters reject unphysical moments") {
    CovarianceState s = vacuum(3);
    s.matrix(0, 0) = 1.0;
    s.matrix(1, 1) = -0.5;
    try {
      squeeze_match_params(s);
      FAIL("expected UnphysicalMoments");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::unphysical_moments);
    }
  }

  TEST_CASE("matched transform on the GHZ state gives a squeezed combination") {
    const auto b = to_bare_basis(ghz_initial_covariance({3, 1.0}));
    const auto p = squeeze_match_params(b);
    const auto g = g_matrix(b, local_transform(p, 3));
    double best = 1e9;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) best = std::min(best, combined_variance(g, i, j));
    CHECK(best < 1.0);
    CHECK(negativity(b, 0) < 0.0);
  }

  TEST_CASE("local transforms are symplectic") {
    const auto t = local_transform(0.7, 0.3, -0.4, 1.1, 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::norm(t.alpha[k]) - std::norm(t.beta[k]) == doctest::Approx(1.0));
      CHECK(t.block(k).determinant() == doctest::Approx(1.0));
    }
    CHECK(max_diff(local_transform(0, 0, 0, 0, 2).matrix(), Eigen::MatrixXd::Identity(4, 4)) < 1e-15);
    LocalTransform sq{{std::cosh(0.5)}, {std::sinh(0.5)}};
    CHECK(max_diff(sq.block(0), Eigen::Vector2d(std::exp(0.5), std::exp(-0.5)).asDiagonal().toDenseMatrix()) < 1e-14);
  }

  TEST_CASE("G of the vacuum is the identity") {
    const auto g = g_matrix(vacuum(3), local_transform(0, 0, 0, 0, 3));
    CHECK(max_diff(g.matrix, Eigen::MatrixXd::Identity(6, 6)) < 1e-15);
    CHECK(g.c == 0.0);
    CHECK(g.d == 0.0);
    const auto printed = g_parameters_as_printed(squeeze_match_params(vacuum(3)));
    CHECK(printed.a == doctest::Approx(-2.0));
    CHECK(printed.c == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("complex Bogoliubov route agrees with the real symplectic route") {
    const auto bare = to_bare_basis(asymmetric_initial_covariance({0.8, 1.3}));
    const auto t = local_transform(0.4, 0.9, -0.2, 0.3, 3);
    const auto g = g_matrix(bare, t);
    const Eigen::MatrixXd l = t.matrix();
    const Eigen::MatrixXd sigma = symplectic_form(3);
    // ỹ_k = p̃_k, x̃_k = −q̃_k up to the factor √2 of the characteristic-function normalisation.
    const Eigen::MatrixXd expected = 2.0 * sigma * l * bare.matrix * l.transpose() * sigma.transpose();
    CHECK(max_diff(g.matrix, expected) < 1e-10);
  }

  TEST_CASE("G from symmetric parameters") {
    const auto g = GMatrix::from_parameters(1.5, 0.7, 0.2, -0.1);
    CHECK(max_diff(g.matrix, g.matrix.transpose()) == 0.0);
    CHECK(g.matrix(0, 0) == 1.5);
    CHECK(g.matrix(1, 1) == 0.7);
    // relabelling the three modes leaves it unchanged
    Eigen::PermutationMatrix<6> p;
    p.indices() << 2, 3, 4, 5, 0, 1;
    CHECK(max_diff(p * g.matrix * p.transpose(), g.matrix) == 0.0);
  }

  TEST_CASE("G of the GHZ state is mode-permutation symmetric") {
    const auto bare = to_bare_basis(ghz_initial_covariance({3, 1.2}));
    const auto g = g_matrix(bare, local_transform(0.3, 0.2, 0.0, 0.7, 3));
    Eigen::PermutationMatrix<6> p;
    p.indices() << 2, 3, 4, 5, 0, 1;
    CHECK(max_diff(p * g.matrix * p.transpose(), g.matrix) < 1e-10);
  }

  TEST_CASE("combined variance") {
    const auto g = g_matrix(vacuum(3), local_transform(0, 0, 0, 0, 3));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(combined_variance(g, i, j) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(combined_variance(g, 1, 1), Error);
    CHECK_THROWS_AS(combined_variance(g, 0, 3), Error);
  }

  TEST_CASE("optimal uniform squeeze equals a brute-force minimum") {
    for (auto v : {ghz_initial_covariance({3, 1.0}), asymmetric_initial_covariance({1.0, 1.489}),
                   asymmetric_initial_covariance({0.4, 0.2})}) {
      for (auto [i, j] : {std::pair{0, 2}, std::pair{2, 0}, std::pair{0, 1}}) {
        const auto o = optimal_uniform_squeeze(v, i, j);
        const double brute =
            brute_force_uniform(v.matrix.block<2, 2>(2 * i, 2 * i), v.matrix.block<2, 2>(2 * j, 2 * j));
        CHECK(o.variance == doctest::Approx(brute).epsilon(1e-8));
        // the reported transform realises that variance through G
        const auto g = g_matrix(to_bare_basis(v), o.transform);
        CHECK(combined_variance(g, i, j) == doctest::Approx(o.variance).epsilon(1e-9));
        // and the reported angles rebuild the same transform
        const auto rebuilt = local_transform(o.r1, o.phi, 0.0, o.theta, 3);
        CHECK(std::abs(rebuilt.alpha[1] - o.transform.alpha[1]) < 1e-10);
        CHECK(std::abs(rebuilt.beta[1] - o.transform.beta[1]) < 1e-10);
      }
    }
  }

  TEST_CASE("minimal combined variance decreases with squeezing") {
    double prev = 2.0;
    for (double r : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const auto rep = entanglement_report(ghz_initial_covariance({3, r}));
      if (r > 0.0) CHECK(rep.best_variance < prev);
      if (r == 0.0) CHECK(rep.best_variance == doctest::Approx(1.0));
      prev = rep.best_variance;
    }
  }

  TEST_CASE("report layout") {
    const auto rep = entanglement_report(ghz_initial_covariance({3, 1.0}));
    CHECK(rep.eta.size() == 3);
    CHECK(rep.pairs.size() == 6);
    CHECK(rep.combined_variances.size() == 6);
    CHECK(rep.best_variance < 1.0);
    CHECK(rep.min_eta() < 0.0);
    std::ostringstream out;
    write_entanglement_csv(out, {rep});
    const auto text = out.str();
    CHECK(text.rfind("t,eta_1,eta_2,eta_3,var_min,var_1_2,var_1_3,var_2_1,var_2_3,var_3_1,var_3_2,r1,r2,phi,theta\n", 0) == 0);
  }

  TEST_CASE("parallel and serial report evaluation agree") {
    Trajectory t;
    for (int k = 0; k < 40; ++k) {
      auto s = asymmetric_initial_covariance({0.05 * k, 1.0});
      s.time = k;
      t.states.push_back(s);
    }
    const auto a = evaluate_reports(t);
    const auto b = evaluate_reports_serial(t);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].time == b[k].time);
      CHECK(a[k].eta == b[k].eta);
      CHECK(a[k].best_variance == b[k].best_variance);
    }
  }

  TEST_CASE("two-mode threshold") {
    CHECK(two_mode_threshold(vacuum(2, Basis::transformed)) == 0.0);
    for (double r : {0.2, 1.0}) {
      CHECK(two_mode_threshold(ghz_initial_covariance({2, r})) == doctest::Approx(0.25 * std::exp(-4 * r) - 0.25));
    }
    try {
      two_mode_threshold(ghz_initial_covariance({3, 1.0}));
      FAIL("expected WrongModeCount");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::wrong_mode_count);
    }
  }

  TEST_CASE("squeezing threshold") {
    // ½ ln(2·9.508332 + 1) = ½ ln 20.016664
    CHECK(squeezing_threshold(10.0, 1.0) == doctest::Approx(1.498283).epsilon(1e-6));
    CHECK(std::abs(squeezing_threshold(10.0, 1.0) - 1.498) < 5e-4);
    CHECK(squeezing_threshold(5.0, 1.0) == doctest::Approx(1.15296).epsilon(1e-5));
    CHECK(squeezing_threshold(0.0, 1.0) == 0.0);
    CHECK(squeezing_threshold(1e-3, 1.0) < 1e-12);
  }
}
