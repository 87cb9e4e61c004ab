#include <doctest.h>

#include <cmath>
#include <random>

#include "soligas/error.hpp"
#include "soligas/gas.hpp"
#include "soligas/positions.hpp"

using namespace soligas;
using doctest::Approx;

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("positions") {
  TEST_CASE("regions") {
    CHECK(region_of(0.5, 1e-3) == SignRegion::Above);
    CHECK(region_of(-0.5, 1e-3) == SignRegion::Below);
    CHECK(region_of(1e-4, 1e-3) == SignRegion::Band);
    CHECK(std::string(to_string(SignRegion::Band)) == "band");
  }

  TEST_CASE("contraction map") {
    const auto y = contract({1.0, 2.0}, 0.0, {-5.0, 5.0});
    CHECK(y[0] == Approx(-4.450693855665945).epsilon(1e-15));
    CHECK(y[1] == Approx(4.725346927832973).epsilon(1e-15));
  }

  TEST_CASE("extremal positions and core") {
    const SolitonConfig c({1.0, 2.0}, {0.0, 0.0});
    const auto core = extremal_and_core(c);
    CHECK(core.x_minus == Approx(-0.5493061443340549).epsilon(1e-12));
    CHECK(core.x_plus == Approx(0.5493061443340549).epsilon(1e-12));
    CHECK(core.X_minus[0] == Approx(-0.5493061443340549).epsilon(1e-12));
    CHECK(core.X_minus[1] == Approx(-0.2746530721670274).epsilon(1e-12));
    CHECK(core.X_plus[0] == Approx(0.5493061443340549).epsilon(1e-12));
    CHECK(core.X_plus[1] == Approx(0.2746530721670274).epsilon(1e-12));
  }

  TEST_CASE("closed forms beyond the core") {
    const SolitonConfig c({1.0, 2.0}, {0.0, 0.0});
    const auto core = extremal_and_core(c);
    const auto left = expand(c, core.x_minus - 1.0);
    const auto right = expand(c, core.x_plus + 1.0);
    CHECK(left.method == "closed_form_left");
    CHECK(right.method == "closed_form_right");
    CHECK(sup_diff(left.X, core.X_minus) < 1e-12);
    CHECK(sup_diff(right.X, core.X_plus) < 1e-12);
  }

  TEST_CASE("separated pair") {
    const SolitonConfig c({1.0, 2.0}, {-3.0, 3.0});
    for (double xs : {0.0, 2.5}) {
      const auto s = expand(c, xs);
      CHECK(s.X[0] == Approx(-3.5493061443340548).epsilon(1e-13));
      CHECK(s.X[1] == Approx(3.2746530721670274).epsilon(1e-13));
      CHECK(s.residual < 1e-12);
      CHECK(sup_diff(contract(c.chi(), xs, s.X), c.y()) < 1e-12);
    }
  }

  TEST_CASE("separated displacements") {
    const std::vector<double> chi{1.0, 2.0};
    const auto d = separated_displacements(chi, {-3.0, 3.0}, {0});
    REQUIRE(d.has_value());
    CHECK((*d)[0] == Approx(-3.5493061443340548));
    CHECK(!separated_displacements(chi, {-3.0, 3.0}, {1}).has_value());
  }

  TEST_CASE("round trip on random configurations") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uc(0.5, 3.0), uy(-10.0, 10.0), ux(-12.0, 12.0);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> chi(6), y(6);
      for (auto& v : chi) v = uc(rng);
      std::sort(chi.begin(), chi.end());
      for (auto& v : y) v = uy(rng);
      const SolitonConfig c(chi, y);
      const double xs = ux(rng);
      const auto s = expand(c, xs);
      CHECK(sup_diff(contract(chi, xs, s.X), y) < 1e-10);
    }
  }

  TEST_CASE("path is monotone in coverage and consistent with expand") {
    const auto cfg = generate_ultra_dilute(5, {});
    PositionPath path(cfg);
    for (int k = 0; k <= 100; ++k) {
      const double xs = path.core().x_minus - 1.0 + k * (path.core().x_plus - path.core().x_minus + 2.0) / 100.0;
      const auto s = path.at(xs);
      CHECK(s.residual < 1e-10);
      CHECK(path.covered_until() >= xs);
    }
    CHECK(path.segments().size() >= 1);
  }

  TEST_CASE("active-set solve from a warm start") {
    const std::vector<double> chi{1.0, 2.0}, y{-3.0, 3.0};
    const auto s = solve_active_set(chi, 0.0, y, {-3.0, 3.0});
    CHECK(s.X[0] == Approx(-3.5493061443340548).epsilon(1e-12));
  }

  TEST_CASE("single soliton is the identity") {
    const auto s = expand(SolitonConfig({1.3}, {2.0}), -4.0);
    CHECK(s.X[0] == 2.0);
  }
}
