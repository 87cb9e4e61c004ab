#include "soligas/observables.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "soligas/error.hpp"
#include "soligas/positions.hpp"

namespace soligas {

namespace {
void check_k(int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "density index must be non-negative");
  if (k > 2) throw Error(ErrorKind::Unsupported, "conserved densities are implemented for k <= 2");
}
}  // namespace

int density_degree(int k) {
  check_k(k);
  return 2 * k + 2;
}

int density_jet_order(int k) {
  check_k(k);
  return k == 2 ? 1 : 0;
}

double density_at(const FieldJet& jet, int k) {
  check_k(k);
  if (jet.order < density_jet_order(k) || static_cast<int>(jet.values.size()) <= density_jet_order(k))
    throw Error(ErrorKind::InvalidArgument, "field jet order too low for density " + std::to_string(k));
  const double u = jet.values[0];
  switch (k) {
    case 0: return u / 4.0;
    case 1: return 3.0 * u * u / 16.0;
    default: {
      const double ux = jet.values[1];
      return 5.0 / 64.0 * (2.0 * u * u * u - ux * ux);
    }
  }
}

Observable Observable::conserved(int k) {
  check_k(k);
  return Observable{"P" + std::to_string(k), density_jet_order(k),
                    [k](const FieldJet& j) { return density_at(j, k); }};
}

Observable Observable::bounded(const std::string& tag) {
  if (tag == "tanh_u") return {tag, 0, [](const FieldJet& j) { return std::tanh(j.values[0]); }};
  if (tag == "clip_u") return {tag, 0, [](const FieldJet& j) { return std::clamp(j.values[0], -1.0, 1.0); }};
  if (tag == "tanh_ux") return {tag, 1, [](const FieldJet& j) { return std::tanh(j.values[1]); }};
  throw Error(ErrorKind::InvalidArgument, "unknown bounded observable '" + tag + "'");
}

IntegrationResult integrate_panels(const std::function<double(double)>& f, double a, double b, double panel,
                                   const QuadratureOptions& opts) {
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "integration interval must satisfy a < b");
  if (!(panel > 0.0)) throw Error(ErrorKind::InvalidArgument, "panel width must be positive");
  int panels = static_cast<int>(std::ceil((b - a) / panel));
  panels = std::clamp(panels, 1, std::max(1, opts.max_subdivisions / 4));
  const double h = (b - a) / panels;
  IntegrationResult res;
  res.a = a;
  res.b = b;
  double l1 = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h, hi = (p + 1 == panels) ? b : lo + h;
    double err = 0.0, pl1 = 0.0;
    const double v = GK::integrate(f, lo, hi, 3, opts.rel_tol, &err, &pl1);
    res.value += v;
    res.error_estimate += err;
    l1 += pl1;
  }
  res.subdivisions = panels;
  if (!std::isfinite(res.value))
    throw Error(ErrorKind::QuadratureFailure, "non-finite integral");
  const double tol = std::max(opts.abs_tol, opts.rel_tol * l1);
  if (res.error_estimate > 1e3 * tol)
    throw Error(ErrorKind::QuadratureFailure,
                "error estimate " + std::to_string(res.error_estimate) + " exceeds tolerance " + std::to_string(tol));
  return res;
}

IntegrationResult integrate_observable(const SolitonConfig& config, const Observable& obs,
                                       std::optional<Interval> interval, const QuadratureOptions& opts) {
  double a, b;
  double chi_min = std::numeric_limits<double>::infinity(), chi_max = 0.0;
  for (double c : config.chi()) {
    chi_min = std::min(chi_min, c);
    chi_max = std::max(chi_max, c);
  }
  if (interval) {
    a = interval->first;
    b = interval->second;
  } else {
    if (config.empty()) return IntegrationResult{};
    const auto core = extremal_and_core(config);
    a = core.x_minus - opts.tail_radius / chi_min;
    b = core.x_plus + opts.tail_radius / chi_min;
  }
  if (config.empty()) {
    IntegrationResult r;
    r.a = a;
    r.b = b;
    return r;
  }
  const FieldEvaluator ev(config);
  auto f = [&](double x) { return obs.eval(ev(x, obs.order)); };
  return integrate_panels(f, a, b, 1.0 / chi_max, opts);
}

IntegrationResult integrate_density(const SolitonConfig& config, int k, std::optional<Interval> interval,
                                    const QuadratureOptions& opts) {
  return integrate_observable(config, Observable::conserved(k), interval, opts);
}

double fluid_cell_mean(const SolitonConfig& config, const Observable& obs, Interval cell,
                       const QuadratureOptions& opts) {
  const double len = cell.second - cell.first;
  if (!(len > 0.0)) throw Error(ErrorKind::InvalidArgument, "fluid cell must be nondegenerate");
  return integrate_observable(config, obs, cell, opts).value / len;
}

}  // namespace soligas
