// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "soligas/effective.hpp"
#include "soligas/error.hpp"
#include "soligas/gas.hpp"
#include "soligas/hydro.hpp"
#include "soligas/model.hpp"
#include "soligas/observables.hpp"
#include "soligas/positions.hpp"
#include "soligas/projections.hpp"
#include "soligas/tau.hpp"
#include "soligas/verify.hpp"

using namespace soligas;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

SolitonConfig random_config(std::mt19937_64& rng, std::size_t n, double chi_lo, double chi_hi, double y_abs) {
  std::uniform_real_distribution<double> uc(chi_lo, chi_hi), uy(-y_abs, y_abs);
  std::vector<double> chi(n), y(n);
  for (;;) {
    for (auto& c : chi) c = uc(rng);
    std::sort(chi.begin(), chi.end());
    if (std::adjacent_find(chi.begin(), chi.end()) == chi.end()) break;
  }
  for (auto& v : y) v = uy(rng);
  return SolitonConfig(chi, y);
}

UltraDiluteParams dilute(double R) {
  UltraDiluteParams p;
  p.R = R;
  return p;
}

// Solitons of the fixtures used by the consistency checks.
std::vector<SolitonConfig> fixtures() {
  std::vector<SolitonConfig> f;
  for (std::size_t n : {2u, 4u, 8u}) f.push_back(generate_ultra_dilute(n, dilute(1.0)));
  for (std::size_t n : {4u, 8u}) f.push_back(generate_ultra_dilute(n, dilute(3.0)));
  f.push_back(SolitonConfig({1.0, 2.0}, {-3.0, 3.0}));
  f.push_back(SolitonConfig({1.0, 2.0}, {0.0, 0.0}));
  f.push_back(SolitonConfig({0.7, 1.3, 2.2}, {-1.0, 0.5, 2.0}));
  return f;
}

// Peak of a well-separated soliton within 3 of `guess`: grid bracket, then Newton on u_x = 0.
double peak(const SolitonConfig& c, double guess) {
  double x = guess, best = -1.0;
  for (double s : linspace(guess - 3.0, guess + 3.0, 601)) {
    const double u = field(c, s, 0).u();
    if (u > best) {
      best = u;
      x = s;
    }
  }
  for (int it = 0; it < 50; ++it) {
    const auto j = field(c, x, 2);
    const double step = j.values[1] / j.values[2];
    x -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

// ---------------------------------------------------------------------------------------------

Outcome one_soliton() {
  const SolitonConfig c({1.0}, {0.0});
  const FieldEvaluator ev(c);
  double err = 0;
  for (double x : linspace(-10.0, 10.0, 1001)) {
    const double s = 1.0 / std::cosh(x);
    err = std::max(err, std::abs(ev(x, 0).u() - 2.0 * s * s));
  }
  return {err < 1e-10, "max error " + fmt("%.2e", err)};
}

Outcome representation_equivalence() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> un(1, 12);
  FieldOptions ex, det;
  ex.method = FieldMethod::Expansion;
  det.method = FieldMethod::Determinant;
  double worst = 0;
  int extended = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_config(rng, un(rng), 0.5, 3.0, 10.0);
    const auto core = extremal_and_core(c);
    const FieldEvaluator fe(c, ex), fd(c, det);
    double scale = 0, err = 0;
    for (double x : linspace(core.x_minus - 3.0, core.x_plus + 3.0, 101)) {
      const auto a = fe(x, 0);
      const auto b = fd(x, 0);
      if (b.extended_precision) ++extended;
      scale = std::max(scale, std::abs(a.u()));
      err = std::max(err, std::abs(a.u() - b.u()));
    }
    worst = std::max(worst, err / scale);
  }
  return {worst < 1e-9, "max relative error " + fmt("%.2e", worst) + ", quad-precision points " + std::to_string(extended)};
}

Outcome factorised_scattering() {
  const SolitonConfig c({1.0, 2.0}, {0.0, 0.0});
  const double T = 50.0;
  std::vector<double> xp(2), xm(2);
  for (std::size_t i = 0; i < 2; ++i) {
    const double v = 4.0 * c.chi(i) * c.chi(i);
    xp[i] = peak(evolve_impact(c, T), c.y(i) + v * T) - v * T;
    xm[i] = peak(evolve_impact(c, -T), c.y(i) - v * T) + v * T;
  }
  // x+ - x- = sum_j sgn(v_j - v_i) phi_ij
  const double expect[2] = {-std::log(3.0), std::log(3.0) / 2.0};
  const auto as = asymptotic_impacts(c);
  double err = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    err = std::max(err, std::abs((xp[i] - xm[i]) - expect[i]));
    err = std::max(err, std::abs(xp[i] - as.plus[i]));
    err = std::max(err, std::abs(xm[i] - as.minus[i]));
  }
  return {err < 1e-4, "shifts (" + fmt("%.6f", xp[0] - xm[0]) + ", " + fmt("%.6f", xp[1] - xm[1]) + "), max error " +
                          fmt("%.2e", err)};
}

Outcome charges() {
  std::mt19937_64 rng(7);
  double worst = 0;
  for (std::size_t n : {1u, 2u, 4u, 8u}) {
    const auto c = random_config(rng, n, 0.5, 2.5, 2.0 * static_cast<double>(n));
    for (int k = 0; k <= 2; ++k) {
      double s = 0;
      for (double x : c.chi()) s += std::pow(x, 2 * k + 1);
      worst = std::max(worst, std::abs(integrate_density(c, k).value - s) / s);
    }
  }
  return {worst < 1e-6, "max relative error " + fmt("%.2e", worst)};
}

Outcome round_trip() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> un(2, 10);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0;
  int interior = 0, failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_config(rng, un(rng), 0.5, 3.0, 10.0);
    const auto core = extremal_and_core(c);
    const double xs = core.x_minus - 2.0 + (core.x_plus - core.x_minus + 4.0) * u01(rng);
    if (xs > core.x_minus && xs < core.x_plus) ++interior;
    try {
      const auto s = expand(c, xs);
      worst = std::max(worst, sup_diff(contract(c.chi(), xs, s.X), c.y()));
    } catch (const Error&) {
      ++failures;
    }
  }
  int dilute_points = 0, dilute_fail = 0;
  for (std::size_t n : {2u, 4u, 8u}) {
    const auto c = generate_ultra_dilute(n, dilute(1.0));
    PositionPath path(c);
    for (double xs : linspace(path.core().x_minus - 2.0, path.core().x_plus + 2.0, 501)) {
      ++dilute_points;
      try {
        if (path.at(xs).residual > 1e-10) ++dilute_fail;
      } catch (const Error&) {
        ++dilute_fail;
      }
    }
  }
  // random failures are reported; only the ultra-dilute fixtures must succeed everywhere
  return {worst < 1e-10 && dilute_fail == 0,
          "max residual " + fmt("%.2e", worst) + ", interior " + std::to_string(interior) + "/100, random failures " +
              std::to_string(failures) + ", ultra-dilute success " + std::to_string(dilute_points - dilute_fail) + "/" +
              std::to_string(dilute_points)};
}

Outcome extremal_core() {
  std::mt19937_64 rng(5);
  double err = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_config(rng, 1 + trial % 8, 0.5, 3.0, 10.0);
    const auto t = scattering_tables(c.chi());
    std::vector<double> lo(c.size()), hi(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double half = 0.5 * t.phi_row_sum(static_cast<Eigen::Index>(i));
      lo[i] = c.y(i) + half;  // x* -> -infinity
      hi[i] = c.y(i) - half;  // x* -> +infinity
    }
    const double left = *std::min_element(lo.begin(), lo.end()) - 5.0;
    const double right = *std::max_element(hi.begin(), hi.end()) + 5.0;
    err = std::max(err, sup_diff(expand(c, left).X, lo));
    err = std::max(err, sup_diff(expand(c, right).X, hi));
  }
  const auto core = extremal_and_core(SolitonConfig({1.0, 2.0}, {0.0, 0.0}));
  const double core_err = std::max(std::abs(core.x_minus + 0.549306), std::abs(core.x_plus - 0.549306));
  return {err < 1e-12 && core_err < 1e-6, "closed-form error " + fmt("%.2e", err) + ", core [" +
                                               fmt("%.6f", core.x_minus) + ", " + fmt("%.6f", core.x_plus) + "]"};
}

Outcome ultra_dilute_oracle() {
  double err = 0, width = 0;
  for (std::size_t n : {2u, 4u, 8u}) {
    UltraDiluteGas gas(n, dilute(1.0));
    PositionPath path(gas.config());
    const double a = path.core().x_minus - 3.0, b = path.core().x_plus + 3.0;
    for (double xs = a; xs <= b; xs += 0.01) err = std::max(err, sup_diff(path.at(xs).X, gas.positions(xs)));
    const double dX = std::sqrt(static_cast<double>(n));
    const auto eff = scan_effective(gas.config(), dX);
    width = std::max(width, std::abs(eff.delta_x - dX));
  }
  return {err < 1e-9 && width < 1e-4, "oracle error " + fmt("%.2e", err) + ", |dx - N^gamma| " + fmt("%.2e", width)};
}

Outcome effective_consistency() {
  std::size_t points = 0, violations = 0;
  int inclusion_fail = 0, bethe_fail = 0;
  double worst_excess = -1e300;
  for (const auto& c : fixtures()) {
    const double dX = std::max(1.0, std::sqrt(static_cast<double>(c.size())));
    const auto eff = scan_effective(c, dX);
    const auto grid = linspace(eff.scan.x_begin, eff.scan.x_end, 1001);
    const auto r = check_effective_implications(c, eff, grid);
    points += r.points;
    violations += r.violations;
    if (!r.core_inclusion) ++inclusion_fail;
    const auto b = bethe_residual(c, eff);
    if (!b.pass) ++bethe_fail;
    worst_excess = std::max(worst_excess, b.worst_excess);
  }
  return {violations == 0 && inclusion_fail == 0 && bethe_fail == 0,
          std::to_string(violations) + "/" + std::to_string(points) + " implication violations, inclusion failures " +
              std::to_string(inclusion_fail) + ", Bethe failures " + std::to_string(bethe_fail) + " (worst excess " +
              fmt("%.2e", worst_excess) + ")"};
}

Outcome projection_limits() {
  double shift_err = 0, sep_err = 0;
  int sep_checked = 0, inclusion_fail = 0;
  for (const auto& c : fixtures()) {
    const std::size_t n = c.size();
    if (n < 2) continue;
    const double z = 60.0 / c.chi(0);
    // remove the last soliton to the right and, when there are enough, the first to the left
    std::vector<int> sp{static_cast<int>(n - 1)}, sm;
    if (n >= 3) sm.push_back(0);
    const auto p = project_out(c, sp, sm);
    std::vector<double> y = c.y();
    for (int i : sp) y[static_cast<std::size_t>(i)] += z;
    for (int i : sm) y[static_cast<std::size_t>(i)] -= z;
    const SolitonConfig far(c.chi(), y);
    const auto core = extremal_and_core(p.config_out);
    const FieldEvaluator ef(far), ep(p.config_out);
    for (double x : linspace(core.x_minus - 5.0, core.x_plus + 5.0, 201))
      shift_err = std::max(shift_err, std::abs(ef(x, 0).u() - ep(x, 0).u()));

    // extraction equals the shift wherever (s+, s-) is separated
    const auto full = extremal_and_core(c);
    for (double xs : linspace(full.x_minus - 2.0, full.x_plus + 2.0, 41)) {
      if (!separated_by(c, sp, sm, xs)) continue;
      const auto e = extract(c, p.kept, xs);
      sep_err = std::max(sep_err, sup_diff(e.config_out.y(), p.config_out.y()));
      ++sep_checked;
    }

    // cell around the middle soliton
    const double dX = std::max(1.0, std::sqrt(static_cast<double>(n)));
    const auto eff = scan_effective(c, dX);
    const std::size_t j = n / 2;
    const double half = std::max(3.0 * eff.delta_x, 0.5 * std::abs(eff.x_eff[j] - eff.x_eff[j - 1]));
    const auto fc = fluid_cell_projection(c, {eff.x_eff[j] - half, eff.x_eff[j] + half}, eff);
    if (!fc.core_inclusion) ++inclusion_fail;
  }
  return {shift_err < 1e-8 && sep_err < 1e-10 && sep_checked > 0 && inclusion_fail == 0,
          "shift error " + fmt("%.2e", shift_err) + ", separated equality " + fmt("%.2e", sep_err) + " over " +
              std::to_string(sep_checked) + " points, inclusion failures " + std::to_string(inclusion_fail)};
}

Outcome local_form_decay() {
  // narrow spectrum chi in (1, 1.1]: the decay rate of every excluded soliton is close to chi*
  UltraDiluteParams p;
  p.R = 0.8;
  p.C = 1.1;
  const auto c = generate_ultra_dilute(6, p);
  const auto eff = scan_effective(c, std::sqrt(6.0));
  const double xs = eff.x_eff[2];
  LocalFormOptions lo;
  lo.chi_star = 1.0;
  lo.two_sided = true;
  const auto lf = verify_local_form(c, xs, edge_ladder(c, xs, 1.0), lo);

  const auto one = verify_support(SolitonConfig({1.5}, {0.0}));
  const double one_err = std::abs(one.measured.at("rate") - 3.0) / 3.0;
  bool mixed_ok = true;
  double mixed_min = 1e300;
  for (const auto& m : {SolitonConfig({1.0, 2.0}, {0.0, 0.0}), SolitonConfig({0.7, 1.3, 2.2}, {-1.0, 0.5, 2.0}),
                        generate_ultra_dilute(4, dilute(1.0))}) {
    const auto r = verify_support(m);
    const double chi_star = m.chi(0);
    mixed_ok = mixed_ok && r.measured.at("rate") >= 1.8 * chi_star;
    mixed_min = std::min(mixed_min, r.measured.at("rate") / chi_star);
  }
  return {lf.pass && one_err < 0.05 && mixed_ok,
          "slopes [" + fmt("%.3f", lf.measured.at("steepest_slope")) + ", " + fmt("%.3f", lf.measured.at("slope")) +
              "] over " + fmt("%.0f", lf.measured.at("fit_points")) + " points, 1-soliton rate error " +
              fmt("%.2e", one_err) + ", mixed min rate/chi* " + fmt("%.3f", mixed_min)};
}

Outcome fluid_cell() {
  double worst = 0;
  bool ok = true;
  for (std::size_t n : {4u, 8u}) {
    const auto c = generate_ultra_dilute(n, dilute(3.0));
    const double N = static_cast<double>(n);
    const double dX = std::sqrt(N);
    const auto eff = scan_effective(c, dX);
    const std::size_t j = n / 2;
    const double half = 3.0 * std::pow(N, 1.1) / 2.0;
    const auto r = verify_fluid_cell(c, {eff.x_eff[j] - half, eff.x_eff[j] + half}, dX);
    ok = ok && r.pass && r.metadata.at("kept") == "1";
    for (int k = 0; k <= 2; ++k) worst = std::max(worst, r.measured.at("discrepancy_k" + std::to_string(k)));
  }
  std::vector<SolitonConfig> ladder;
  for (std::size_t n : {2u, 4u, 8u}) ladder.push_back(generate_ultra_dilute(n, dilute(3.0)));
  std::string diffs;
  for (int k = 0; k <= 2; ++k) {
    const auto r = verify_weak_limit(ladder, k, 2.1, GaussianTest{});
    ok = ok && r.pass;
    const auto& d = r.series.at("difference");
    diffs += " k" + std::to_string(k) + ":" + fmt("%.1e", d.front()) + "->" + fmt("%.1e", d.back());
  }
  return {ok && worst < 1e-4, "cell discrepancy " + fmt("%.2e", worst) + ", weak limit" + diffs};
}

DensityField smooth_field(std::size_t cells, double amp) {
  DensityField f;
  f.chi_grid = linspace(1.0, 2.0, 9);
  for (std::size_t c = 0; c < cells; ++c) f.x_grid.push_back((static_cast<double>(c) + 0.5) * 100.0 / cells);
  f.rho = Eigen::MatrixXd::Zero(9, static_cast<Eigen::Index>(cells));
  for (std::size_t c = 0; c < cells; ++c)
    for (int a = 0; a < 9; ++a)
      f.rho(a, static_cast<Eigen::Index>(c)) =
          amp * (1.0 + 0.5 * std::sin(2.0 * M_PI * f.x_grid[c] / 100.0)) * std::exp(-std::pow(f.chi_grid[a] - 1.5, 2));
  return f;
}

Outcome ghd() {
  const auto f = smooth_field(64, 0.05);
  const double residual = effective_velocity(f).residual;

  const auto zero = smooth_field(16, 0.0);
  const auto v0 = effective_velocity(zero);
  double free_err = 0;
  for (Eigen::Index a = 0; a < v0.v.rows(); ++a)
    for (Eigen::Index c = 0; c < v0.v.cols(); ++c) {
      const double chi = zero.chi_grid[static_cast<std::size_t>(a)];
      free_err = std::max(free_err, std::abs(v0.v(a, c) - 4.0 * chi * chi) / (4.0 * chi * chi));
    }

  auto g = smooth_field(128, 0.05);
  const double m0 = g.rho.sum();
  const double dt = max_stable_dt(g);
  for (int s = 0; s < 1000; ++s) g = ghd_step(g, dt);
  const double drift = std::abs(g.rho.sum() - m0) / m0;

  // free streaming: a single spectral node at chi = 1 and a negligible density
  DensityField h;
  h.chi_grid = {1.0};
  const std::size_t cells = 400;
  for (std::size_t c = 0; c < cells; ++c) h.x_grid.push_back((static_cast<double>(c) + 0.5) * 0.25);
  h.rho = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(cells));
  for (std::size_t c = 0; c < cells; ++c) h.rho(0, static_cast<Eigen::Index>(c)) = 1e-9 * std::exp(-std::pow(h.x_grid[c] - 20.0, 2));
  const double t_end = 10.0;  // peak moves 4 t = 40
  const auto out = ghd_evolve(h, t_end);
  Eigen::Index arg = 0;
  out.rho.row(0).maxCoeff(&arg);
  const double peak_err = std::abs(out.x_grid[static_cast<std::size_t>(arg)] - 60.0) / h.cell_width();

  // microscopic vs kinetic speeds in a small interacting gas, reported only
  const auto gas = generate_uniform(12, 40.0, {1.0, 2.0}, 3);
  const auto traj = microscopic_trajectories(gas, {0.0, 2.0}, 2.0);
  double speed = 0;
  for (std::size_t i = 0; i < gas.size(); ++i) speed += (traj[1][i] - traj[0][i]) / 2.0 / (4.0 * gas.chi(i) * gas.chi(i));
  speed /= static_cast<double>(gas.size());

  return {residual < 1e-10 && free_err < 4.0 * std::numeric_limits<double>::epsilon() && drift < 1e-9 && peak_err < 1.0,
          "residual " + fmt("%.2e", residual) + ", free velocity error " + fmt("%.1e", free_err) + ", mass drift " +
              fmt("%.2e", drift) + ", peak error " + fmt("%.2f", peak_err) + " cells; micro/bare speed ratio " +
              fmt("%.3f", speed) + " (reported)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double time_limit;  // seconds, <= 0 for none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"one-soliton exactness", 1.0, one_soliton},
      {"representation equivalence", 30.0, representation_equivalence},
      {"factorised scattering", 10.0, factorised_scattering},
      {"charge identities", 60.0, charges},
      {"contraction/expansion round trip", 0.0, round_trip},
      {"extremal positions and core", 0.0, extremal_core},
      {"ultra-dilute oracle", 0.0, ultra_dilute_oracle},
      {"effective-position consistency", 0.0, effective_consistency},
      {"projection limits", 0.0, projection_limits},
      {"local-form decay", 0.0, local_form_decay},
      {"fluid-cell mean identity", 0.0, fluid_cell},
      {"GHD solver", 0.0, ghd},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0 && secs >= c.time_limit) {
      o.pass = false;
      o.detail += ", over time limit";
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
