#include <doctest.h>

#include <cmath>

#include "soligas/effective.hpp"
#include "soligas/gas.hpp"
#include "soligas/verify.hpp"

using namespace soligas;
using doctest::Approx;

TEST_SUITE("verify") {
  TEST_CASE("slope fit") {
    CHECK(fit_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == Approx(2.0));
  }

  TEST_CASE("gaussian test function") {
    const GaussianTest g{1.0, 2.0, 3.0};
    CHECK(g(1.0) == Approx(3.0));
  }

  TEST_CASE("support decay of one soliton") {
    const auto r = verify_support(SolitonConfig({1.5}, {0.0}));
    CHECK(r.measured.at("rate") == Approx(3.0).epsilon(0.05));
    CHECK(r.pass);
  }

  TEST_CASE("local form on an ultra-dilute gas") {
    UltraDiluteParams p;
    p.R = 0.3;
    const auto cfg = generate_ultra_dilute(6, p);
    const auto e = scan_effective(cfg, std::sqrt(6.0));
    const double xs = e.x_eff[2];
    LocalFormOptions o;
    o.chi_star = 1.0;
    const auto r = verify_local_form(cfg, xs, edge_ladder(cfg, xs, 0.5), o);
    CHECK(r.pass);
    CHECK(r.measured.at("slope") <= -0.9);
  }

  TEST_CASE("fluid cell") {
    UltraDiluteParams p;
    p.R = 3.0;
    const auto cfg = generate_ultra_dilute(4, p);
    const double dX = 2.0;
    const auto e = scan_effective(cfg, dX);
    const double half = 1.5 * std::pow(4.0, 1.1);
    const auto r = verify_fluid_cell(cfg, {e.x_eff[2] - half, e.x_eff[2] + half}, dX);
    CHECK(r.pass);
    for (int k = 0; k <= 2; ++k) CHECK(r.measured.at("discrepancy_k" + std::to_string(k)) < 1e-4);
  }

  TEST_CASE("weak limit ladder") {
    UltraDiluteParams p;
    p.R = 3.0;
    std::vector<SolitonConfig> ladder;
    for (std::size_t n : {2u, 4u, 8u}) ladder.push_back(generate_ultra_dilute(n, p));
    const auto r = verify_weak_limit(ladder, 0, 2.1, GaussianTest{});
    CHECK(r.series.at("difference").size() == 3);
    CHECK(r.pass);
  }
}
