#include "soligas/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "soligas/effective.hpp"
#include "soligas/error.hpp"
#include "soligas/observables.hpp"
#include "soligas/parallel.hpp"
#include "soligas/positions.hpp"
#include "soligas/projections.hpp"
#include "soligas/tau.hpp"

namespace soligas {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double min_chi(const SolitonConfig& c) { return *std::min_element(c.chi().begin(), c.chi().end()); }
double max_chi(const SolitonConfig& c) { return *std::max_element(c.chi().begin(), c.chi().end()); }

}  // namespace

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw Error(ErrorKind::InvalidArgument, "fit needs two or more points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0) throw Error(ErrorKind::InvalidArgument, "fit abscissae are all equal");
  return sxy / sxx;
}

std::vector<double> edge_ladder(const SolitonConfig& config, double x_star, double offset, double epsilon) {
  ExpandOptions eo;
  eo.epsilon = epsilon;
  const auto sol = expand(config, x_star, eo);
  std::vector<double> L;
  for (double d : sol.d)
    if (std::abs(d) > offset && 2.0 * std::abs(d) - offset >= 2.0 * epsilon) L.push_back(2.0 * std::abs(d) - offset);
  std::sort(L.begin(), L.end());
  L.erase(std::unique(L.begin(), L.end()), L.end());
  return L;
}

TheoremReport verify_local_form(const SolitonConfig& config, double x_star, std::vector<double> L_list,
                                const LocalFormOptions& opts) {
  if (config.empty()) throw Error(ErrorKind::InvalidArgument, "local form needs at least one soliton");
  for (double L : L_list)
    if (!(L >= 2.0 * opts.epsilon)) throw Error(ErrorKind::InvalidArgument, "each L must be at least 2 epsilon");
  std::sort(L_list.begin(), L_list.end());
  const double chi_star = opts.chi_star > 0 ? opts.chi_star : min_chi(config);
  const double C = opts.C > 0 ? opts.C : max_chi(config);
  const int max_n = *std::max_element(opts.orders.begin(), opts.orders.end());

  TheoremReport rep;
  rep.theorem = "local_form";
  rep.metadata["x_star"] = fmt_double(x_star);
  rep.metadata["J"] = "[" + fmt_double(x_star - 1.0 / C) + ", " + fmt_double(x_star + 1.0 / C) + "]";
  rep.metadata["grid_points"] = std::to_string(opts.grid_points);

  std::vector<double> xs(static_cast<std::size_t>(opts.grid_points));
  for (int i = 0; i < opts.grid_points; ++i)
    xs[static_cast<std::size_t>(i)] = x_star - 1.0 / C + 2.0 / C * i / std::max(1, opts.grid_points - 1);
  const auto full = field_grid(config, xs, max_n);

  // errors[n][l]
  std::vector<std::vector<double>> errors(opts.orders.size(), std::vector<double>(L_list.size(), 0.0));
  std::vector<double> kept(L_list.size());
  for (std::size_t l = 0; l < L_list.size(); ++l) {
    const double L = L_list[l];
    const auto proj = local_projection(config, {x_star - L / 2, x_star + L / 2}, opts.epsilon);
    kept[l] = static_cast<double>(proj.kept.size());
    std::vector<FieldJet> part;
    if (!proj.config_out.empty()) part = field_grid(proj.config_out, xs, max_n);
    for (std::size_t q = 0; q < opts.orders.size(); ++q) {
      const auto n = static_cast<std::size_t>(opts.orders[q]);
      double e = 0.0;
      if (proj.kept.size() != config.size())
        for (std::size_t i = 0; i < xs.size(); ++i)
          e = std::max(e, std::abs(full[i].values[n] - (part.empty() ? 0.0 : part[i].values[n])));
      errors[q][l] = e;
    }
  }
  rep.series["L"] = L_list;
  rep.series["kept"] = kept;

  bool pass = true;
  std::size_t fitted = std::numeric_limits<std::size_t>::max();
  double worst_slope = -std::numeric_limits<double>::infinity();
  double steepest = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < opts.orders.size(); ++q) {
    const std::string tag = "n" + std::to_string(opts.orders[q]);
    rep.series["error_" + tag] = errors[q];
    bool monotone = true;
    for (std::size_t l = 1; l < L_list.size(); ++l)
      if (errors[q][l] > errors[q][l - 1] + opts.floor) monotone = false;
    rep.measured["monotone_" + tag] = monotone ? 1.0 : 0.0;
    pass = pass && monotone;
    std::vector<double> fx, fy;
    for (std::size_t l = 0; l < L_list.size(); ++l)
      if (errors[q][l] > opts.floor) {
        fx.push_back(L_list[l]);
        fy.push_back(std::log(errors[q][l]));
      }
    fitted = std::min(fitted, fx.size());
    if (fx.size() >= opts.min_fit_points) {
      const double s = fit_slope(fx, fy);
      rep.measured["slope_" + tag] = s;
      worst_slope = std::max(worst_slope, s);
      steepest = std::min(steepest, s);
    }
  }
  rep.measured["fit_points"] = static_cast<double>(fitted);
  rep.bound["slope"] = -(1.0 - opts.slope_tolerance) * chi_star;
  rep.bound["chi_star"] = chi_star;
  if (fitted >= opts.min_fit_points) {
    rep.measured["slope"] = worst_slope;
    pass = pass && worst_slope <= rep.bound["slope"];
    rep.measured["steepest_slope"] = steepest;
    if (opts.two_sided) {
      rep.bound["steepest_slope"] = -(1.0 + opts.slope_tolerance) * chi_star;
      pass = pass && steepest >= rep.bound["steepest_slope"];
    }
    rep.metadata["fit"] = "least squares of log error against L";
  } else {
    rep.metadata["fit"] = "insufficient points above floor";
    pass = false;
  }
  rep.pass = pass;
  return rep;
}

TheoremReport verify_support(const SolitonConfig& config, const SupportOptions& opts) {
  if (config.empty()) throw Error(ErrorKind::InvalidArgument, "support check needs at least one soliton");
  const double chi_star = opts.chi_star > 0 ? opts.chi_star : min_chi(config);
  const double N = static_cast<double>(config.size());
  const double D = opts.D > 0 ? opts.D : 8.0 * max_chi(config) * max_chi(config);
  const auto core = extremal_and_core(config);
  const FieldEvaluator ev(config);

  TheoremReport rep;
  rep.theorem = "support";
  rep.metadata["core"] = "[" + fmt_double(core.x_minus) + ", " + fmt_double(core.x_plus) + "]";
  std::vector<double> dist, right, left;
  bool envelope_ok = true;
  double worst_ratio = 0.0;
  for (double k : opts.distances) {
    const double delta = k / chi_star;
    dist.push_back(delta);
    const double ur = std::abs(ev(core.x_plus + delta, 0).u());
    const double ul = std::abs(ev(core.x_minus - delta, 0).u());
    right.push_back(ur);
    left.push_back(ul);
    const double env = D * std::pow(N, opts.kappa) * std::exp(opts.E * std::pow(N, opts.alpha) - 2.0 * chi_star * delta);
    worst_ratio = std::max(worst_ratio, std::max(ur, ul) / env);
    if (ur > env || ul > env) envelope_ok = false;
  }
  rep.series["distance"] = dist;
  rep.series["u_right"] = right;
  rep.series["u_left"] = left;
  auto rate = [&](const std::vector<double>& u) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i] > 0) {
        x.push_back(dist[i]);
        y.push_back(std::log(u[i]));
      }
    return x.size() >= 2 ? -fit_slope(x, y) : std::numeric_limits<double>::infinity();
  };
  rep.measured["rate_right"] = rate(right);
  rep.measured["rate_left"] = rate(left);
  rep.measured["rate"] = std::min(rep.measured["rate_right"], rep.measured["rate_left"]);
  rep.measured["envelope_ratio"] = worst_ratio;
  rep.bound["rate"] = 2.0 * chi_star * (1.0 - opts.rate_tolerance);
  rep.bound["envelope_ratio"] = 1.0;
  rep.pass = rep.measured["rate"] >= rep.bound["rate"] && envelope_ok;
  return rep;
}

TheoremReport verify_fluid_cell(const SolitonConfig& config, std::pair<double, double> cell, double delta_X,
                                const FluidCellOptions& opts) {
  const double L = cell.second - cell.first;
  if (!(L > 0)) throw Error(ErrorKind::InvalidArgument, "cell must be nondegenerate");
  ScanOptions so;
  so.epsilon = opts.epsilon;
  const auto eff = scan_effective(config, delta_X, so);
  if (!(cell.first + eff.delta_x < cell.second - eff.delta_x))
    throw Error(ErrorKind::InvalidArgument, "cell interior is empty after shrinking by the effective imprecision");
  const auto fc = fluid_cell_projection(config, cell, eff, opts.epsilon);

  TheoremReport rep;
  rep.theorem = "fluid_cell";
  rep.metadata["cell"] = "[" + fmt_double(cell.first) + ", " + fmt_double(cell.second) + "]";
  rep.metadata["kept"] = std::to_string(fc.kept.size());
  rep.measured["delta_x"] = eff.delta_x;
  bool pass = true;
  for (int k : opts.k_list) {
    const std::string tag = "k" + std::to_string(k);
    const double cell_mean = config.empty() ? 0.0 : integrate_density(config, k, cell).value / L;
    double sum = 0.0;
    for (int i : fc.kept) sum += std::pow(config.chi(static_cast<std::size_t>(i)), 2 * k + 1);
    const double projected = fc.config_out.empty() ? 0.0 : integrate_density(fc.config_out, k).value / L;
    rep.measured["cell_mean_" + tag] = cell_mean;
    rep.measured["charge_mean_" + tag] = sum / L;
    rep.measured["discrepancy_" + tag] = std::abs(cell_mean - sum / L);
    rep.measured["projected_discrepancy_" + tag] = std::abs(cell_mean - projected);
    rep.bound["discrepancy_" + tag] = opts.tolerance;
    rep.bound["projected_discrepancy_" + tag] = opts.tolerance;
    pass = pass && rep.measured["discrepancy_" + tag] <= opts.tolerance &&
           rep.measured["projected_discrepancy_" + tag] <= opts.tolerance;
  }
  rep.pass = pass;
  return rep;
}

double GaussianTest::operator()(double x) const {
  const double z = (x - centre) / width;
  return amplitude * std::exp(-0.5 * z * z);
}

TheoremReport verify_weak_limit(const std::vector<SolitonConfig>& configs, int k, double Lambda,
                                const GaussianTest& f, const WeakLimitOptions& opts) {
  TheoremReport rep;
  rep.theorem = "weak_limit";
  rep.metadata["k"] = std::to_string(k);
  rep.metadata["Lambda"] = fmt_double(Lambda);
  std::vector<double> ns(configs.size()), lhs(configs.size()), rhs(configs.size()), diff(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto& cfg = configs[c];
    const double N = static_cast<double>(cfg.size());
    ns[c] = N;
    if (cfg.empty()) continue;
    const double scale = std::pow(N, Lambda);
    Observable weighted{"f*P", density_jet_order(k),
                        [&](const FieldJet& j) { return f(j.x / scale) * density_at(j, k); }};
    lhs[c] = integrate_observable(cfg, weighted, std::nullopt).value / scale;
    ScanOptions so;
    so.epsilon = opts.epsilon;
    const auto eff = scan_effective(cfg, std::max(std::pow(N, opts.gamma), opts.epsilon), so);
    double s = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) s += f(eff.x_eff[i] / scale) * std::pow(cfg.chi(i), 2 * k + 1);
    rhs[c] = s / scale;
    diff[c] = std::abs(lhs[c] - rhs[c]);
  }
  rep.series["N"] = ns;
  rep.series["lhs"] = lhs;
  rep.series["rhs"] = rhs;
  rep.series["difference"] = diff;
  bool decreasing = true;
  for (std::size_t c = 1; c < diff.size(); ++c)
    if (!(diff[c] < diff[c - 1]) && !(diff[c] <= 1e-14 && diff[c - 1] <= 1e-14)) decreasing = false;
  rep.measured["decreasing"] = decreasing ? 1.0 : 0.0;
  rep.measured["last_difference"] = diff.empty() ? 0.0 : diff.back();
  rep.bound["decreasing"] = 1.0;
  rep.pass = decreasing;
  return rep;
}

}  // namespace soligas
