#include <doctest.h>

#include <cmath>

#include "soligas/effective.hpp"
#include "soligas/gas.hpp"

using namespace soligas;
using doctest::Approx;

TEST_SUITE("effective") {
  TEST_CASE("separated pair") {
    const SolitonConfig c({1.0, 2.0}, {-3.0, 3.0});
    const auto e = scan_effective(c, 0.5);
    CHECK(e.x_left[0] == Approx(-4.04930614433405).epsilon(1e-12));
    CHECK(e.x_right[0] == Approx(-3.04930614433405).epsilon(1e-12));
    CHECK(e.x_left[1] == Approx(2.77465307216703).epsilon(1e-12));
    CHECK(e.x_right[1] == Approx(3.77465307216703).epsilon(1e-12));
    CHECK(e.x_eff[0] == Approx(-3.54930614433405).epsilon(1e-12));
    CHECK(e.delta_x == Approx(0.5).epsilon(1e-12));
    CHECK(e.scan.converged);
    CHECK(e.scan.x_begin < e.scan.x_end);
  }

  TEST_CASE("trajectory rows") {
    const SolitonConfig c({1.0, 2.0}, {-3.0, 3.0});
    const auto rows = trajectory(c, {0.0, 2.5});
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][1] == Approx(3.2746530721670274));
  }

  TEST_CASE("ultra-dilute widths are delta_X") {
    for (std::size_t n : {2u, 4u, 8u}) {
      const auto cfg = generate_ultra_dilute(n, {});
      const double dX = std::sqrt(static_cast<double>(n));
      const auto e = scan_effective(cfg, dX);
      CHECK(std::abs(e.delta_x - dX) < 1e-4);
      const auto b = bethe_residual(cfg, e);
      CHECK(b.pass);
    }
  }

  TEST_CASE("implications and core inclusion") {
    const auto cfg = generate_ultra_dilute(4, {});
    const auto e = scan_effective(cfg, 2.0);
    std::vector<double> grid;
    for (int k = 0; k <= 200; ++k) grid.push_back(e.scan.x_begin + (e.scan.x_end - e.scan.x_begin) * k / 200.0);
    const auto r = check_effective_implications(cfg, e, grid);
    CHECK(r.points == grid.size());
    CHECK(r.pass());
  }

  TEST_CASE("interacting pair") {
    const SolitonConfig c({1.0, 2.0}, {0.0, 0.0});
    const auto e = scan_effective(c, 1.0);
    for (std::size_t i = 0; i < 2; ++i) CHECK(e.x_left[i] <= e.x_right[i]);
    CHECK(e.delta_x >= 1.0 - 1e-12);
  }
}
