#include "soligas/effective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "soligas/error.hpp"

namespace soligas {

EffectiveSolution scan_effective(const SolitonConfig& config, double delta_X, const ScanOptions& opts) {
  if (!(delta_X >= opts.epsilon))
    throw Error(ErrorKind::InvalidArgument, "delta_X must be at least epsilon");
  EffectiveSolution out;
  out.delta_X = delta_X;
  out.scan.tol_x = opts.tol_x;
  const std::size_t n = config.size();
  if (n == 0) return out;

  ExpandOptions eo;
  eo.epsilon = opts.epsilon;
  PositionPath path(config, eo);
  const double margin = opts.margin >= 0.0 ? opts.margin : 2.0 * (delta_X + opts.epsilon);
  out.scan.x_begin = std::min(path.start(), path.core().x_minus - opts.epsilon - delta_X - margin);
  out.scan.x_end = path.core().x_plus + opts.epsilon + delta_X + margin;
  path.extend_to(std::numeric_limits<double>::infinity());

  const double inf = std::numeric_limits<double>::infinity();
  out.x_left.assign(n, inf);
  out.x_right.assign(n, -inf);
  // Before the path start every X_i equals X_i^- (constant).
  for (std::size_t i = 0; i < n; ++i) {
    const double xm = path.core().X_minus[i];
    if (xm - path.start() <= delta_X) out.x_left[i] = xm - delta_X;
  }
  for (const auto& s : path.segments()) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double q = s.q(ii);
      auto d_at = [&](double x) { return s.da(ii) - (x - s.xa) * q; };
      // left: first x with d <= delta_X
      if (out.x_left[i] == inf) {
        if (d_at(s.x0) <= delta_X) out.x_left[i] = s.x0;
        else if (q > 0) {
          const double xc = s.xa + (s.da(ii) - delta_X) / q;
          if (xc <= s.x1) out.x_left[i] = xc;
        }
      }
      // right: last x with d >= -delta_X
      if (q > 0) {
        if (d_at(s.x0) >= -delta_X) out.x_right[i] = std::max(out.x_right[i], std::min(s.x1, s.xa + (s.da(ii) + delta_X) / q));
      } else if (std::isfinite(s.x1)) {
        // non-decreasing: the segment end is the last candidate
        if (d_at(s.x1) >= -delta_X) out.x_right[i] = std::max(out.x_right[i], s.x1);
      } else if (d_at(s.x0) >= -delta_X) {
        throw Error(ErrorKind::SolverFailure, "displacement does not leave the band to the right");
      }
    }
  }
  out.x_eff.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(out.x_left[i]) || !std::isfinite(out.x_right[i]))
      throw Error(ErrorKind::SolverFailure, "effective position crossing not found");
    if (out.x_left[i] > out.x_right[i]) out.scan.converged = false;
    out.x_eff[i] = 0.5 * (out.x_left[i] + out.x_right[i]);
    out.delta_x = std::max(out.delta_x, 0.5 * (out.x_right[i] - out.x_left[i]));
  }
  out.scan.segments = path.segments().size();
  out.scan.folds = path.folds();
  out.scan.events = path.events();
  return out;
}

std::vector<std::vector<double>> trajectory(const SolitonConfig& config, const std::vector<double>& x_grid,
                                            double epsilon) {
  ExpandOptions eo;
  eo.epsilon = epsilon;
  PositionPath path(config, eo);
  std::vector<double> sorted = x_grid;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::vector<double>> rows;
  rows.reserve(x_grid.size());
  for (double x : x_grid) {
    const auto d = path.displacements(x);
    std::vector<double> r(static_cast<std::size_t>(d.size()));
    for (Eigen::Index i = 0; i < d.size(); ++i) r[static_cast<std::size_t>(i)] = x + d(i);
    rows.push_back(std::move(r));
  }
  return rows;
}

BetheReport bethe_residual(const SolitonConfig& config, const EffectiveSolution& eff) {
  const std::size_t n = config.size();
  BetheReport r;
  r.bound = eff.delta_X + eff.delta_x;
  r.delta.assign(n, 0.0);
  r.slack.assign(n, 0.0);
  if (n == 0) return r;
  if (eff.x_eff.size() != n) throw Error(ErrorKind::LengthMismatch, "effective solution does not match config");
  const auto t = scattering_tables(config.chi());
  r.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double p = t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double gap = eff.x_eff[i] - eff.x_eff[j];
      if (std::abs(gap) > 2.0 * eff.delta_x) acc += sgn(gap) * p;
      else r.slack[i] += 0.5 * std::abs(p);
    }
    r.delta[i] = config.y(i) - eff.x_eff[i] - 0.5 * acc;
    const double excess = std::abs(r.delta[i]) - r.slack[i] - r.bound;
    r.worst_excess = std::max(r.worst_excess, excess);
    // small absolute allowance for the scan's floating-point crossing locations
    if (excess > 1e-9 * (1.0 + r.bound)) r.pass = false;
  }
  return r;
}

ImplicationReport check_effective_implications(const SolitonConfig& config, const EffectiveSolution& eff,
                                               const std::vector<double>& x_grid, double epsilon) {
  ImplicationReport rep;
  const std::size_t n = config.size();
  if (n == 0) return rep;
  ExpandOptions eo;
  eo.epsilon = epsilon;
  PositionPath path(config, eo);
  for (double xs : x_grid) {
    const auto d = path.displacements(xs);
    ++rep.points;
    for (std::size_t i = 0; i < n; ++i) {
      const double X = xs + d(static_cast<Eigen::Index>(i));
      if (eff.x_eff[i] < xs - eff.delta_x && !(X < xs - eff.delta_X)) ++rep.violations;
      if (eff.x_eff[i] > xs + eff.delta_x && !(X > xs + eff.delta_X)) ++rep.violations;
    }
  }
  const auto core = path.core();
  const double lo = *std::min_element(eff.x_eff.begin(), eff.x_eff.end()) - eff.delta_x;
  const double hi = *std::max_element(eff.x_eff.begin(), eff.x_eff.end()) + eff.delta_x;
  rep.core_margin = std::min(core.x_minus - lo, hi - core.x_plus);
  rep.core_inclusion = rep.core_margin >= -1e-9;
  return rep;
}

}  // namespace soligas
