// Properties of the entanglement measures along simulated trajectories.
#include <doctest.h>

#include <cmath>

#include "oscbath/entanglement.hpp"
#include "oscbath/runner.hpp"

using namespace oscbath;

TEST_SUITE("entanglement") {
  TEST_CASE("symmetric state keeps degenerate negativities and continuous eta") {
    RunConfig c;
    c.ghz.r = 1.2;
    c.t_max = 10.0;
    c.sample_dt = 1e-3;
    const auto result = simulate(c);
    double biggest_jump = 0.0;
    for (std::size_t k = 0; k < result.reports.size(); ++k) {
      const auto& e = result.reports[k].eta;
      CHECK(std::abs(e[1] - e[0]) < 1e-9);
      CHECK(std::abs(e[2] - e[0]) < 1e-9);
      if (k > 0) biggest_jump = std::max(biggest_jump, std::abs(e[0] - result.reports[k - 1].eta[0]));
    }
    CHECK(biggest_jump < 0.05);
  }

  TEST_CASE("two-mode threshold is a sufficient entanglement test") {
    RunConfig c;
    c.system.n_modes = 2;
    c.ghz.r = 1.2;
    c.sample_dt = 0.1;
    const auto result = simulate(c);
    CHECK(two_mode_threshold(result.trajectory.states.front()) < 0.0);
    CHECK(result.reports.front().min_eta() < 0.0);
    int threshold_entangled = 0, missed = 0, late_agree = 0;
    for (std::size_t k = 0; k < result.reports.size(); ++k) {
      const double thr = two_mode_threshold(result.trajectory.states[k]);
      const double eta = result.reports[k].min_eta();
      if (thr < -1e-6) {
        ++threshold_entangled;
        CHECK(eta < 0.0);
      }
      // Once the free-mode squeeze has rotated away from q the product V11·V44
      // exceeds ¼ while the state is still entangled.
      if (thr > 1e-3 && eta < -1e-3) ++missed;
      if (result.trajectory.states[k].time > 20.0 && thr > 0.0 && eta > 0.0) ++late_agree;
    }
    CHECK(threshold_entangled > 0);
    CHECK(missed > 0);
    CHECK(late_agree > 50);
  }
}
