#include <doctest.h>

#include <cmath>

#include "soligas/error.hpp"
#include "soligas/gas.hpp"
#include "soligas/projections.hpp"
#include "soligas/tau.hpp"

using namespace soligas;
using doctest::Approx;

TEST_SUITE("projections") {
  TEST_CASE("limit shift") {
    const SolitonConfig c({1.0, 2.0}, {0.0, 0.0});
    const auto p = project_out(c, {1}, {});
    CHECK(p.kept == std::vector<int>{0});
    CHECK(p.config_out.y(0) == Approx(-0.5493061443340549).epsilon(1e-14));
    CHECK(p.method == ProjectionMethod::LimitShift);
    try {
      project_out(c, {1}, {1});
      FAIL("expected OverlappingSubsets");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::OverlappingSubsets);
    }
  }

  TEST_CASE("limit shift matches a far translation") {
    const SolitonConfig c({1.0, 2.0}, {0.0, 0.0});
    const auto p = project_out(c, {1}, {});
    const double z = 60.0;
    const SolitonConfig far({1.0, 2.0}, {0.0, z});
    for (double x : {-3.0, -1.0, 0.0, 1.0, 3.0}) CHECK(std::abs(field(far, x, 0).u() - field(p.config_out, x, 0).u()) < 1e-8);
  }

  TEST_CASE("extraction equals the shift when separated") {
    const SolitonConfig c({1.0, 2.0}, {-3.0, 3.0});
    CHECK(separated_by(c, {1}, {}, 0.0));
    CHECK(!separated_by(c, {0}, {}, 0.0));
    const auto e = extract(c, {0}, 0.0);
    const auto p = project_out(c, {1}, {});
    CHECK(std::abs(e.config_out.y(0) - p.config_out.y(0)) < 1e-10);
    CHECK(e.config_out.y(0) == Approx(-3.5493061443340548));
  }

  TEST_CASE("local projection") {
    const SolitonConfig c({1.0, 2.0}, {-3.0, 3.0});
    const auto p = local_projection(c, {-5.0, -1.0});
    CHECK(p.kept == std::vector<int>{0});
    CHECK(p.method == ProjectionMethod::LocalProjection);
    CHECK_THROWS(local_projection(c, {0.0, 1e-4}));
  }

  TEST_CASE("fluid cell projection on an ultra-dilute gas") {
    UltraDiluteParams up;
    up.R = 3.0;
    const auto cfg = generate_ultra_dilute(4, up);
    const double half = 1.5 * std::pow(4.0, 1.1);
    const auto e = scan_effective(cfg, 2.0);
    const auto p = fluid_cell_projection(cfg, {e.x_eff[2] - half, e.x_eff[2] + half}, e);
    CHECK(p.kept == std::vector<int>{2});
    CHECK(p.core_inclusion);
    if (p.explicit_checked) CHECK(p.explicit_deviation < 1e-10);
  }
}
