#include "soligas/projections.hpp"

#include <algorithm>
#include <cmath>

#include "soligas/error.hpp"
#include "soligas/positions.hpp"

namespace soligas {

const char* to_string(ProjectionMethod m) noexcept {
  switch (m) {
    case ProjectionMethod::LimitShift: return "limit_shift";
    case ProjectionMethod::Extraction: return "extraction";
    case ProjectionMethod::LocalProjection: return "local_projection";
    case ProjectionMethod::FluidCell: return "fluid_cell";
  }
  return "?";
}

namespace {

std::vector<int> normalized(std::vector<int> v, std::size_t n) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  for (int i : v)
    if (i < 0 || static_cast<std::size_t>(i) >= n) throw Error(ErrorKind::InvalidArgument, "soliton index out of range");
  return v;
}

}  // namespace

ProjectionResult project_out(const SolitonConfig& config, const std::vector<int>& s_plus,
                             const std::vector<int>& s_minus) {
  const std::size_t n = config.size();
  ProjectionResult r;
  r.removed_right = normalized(s_plus, n);
  r.removed_left = normalized(s_minus, n);
  std::vector<char> mark(n, 0);
  for (int i : r.removed_right) mark[static_cast<std::size_t>(i)] = 1;
  for (int i : r.removed_left) {
    if (mark[static_cast<std::size_t>(i)]) throw Error(ErrorKind::OverlappingSubsets, "s+ and s- intersect");
    mark[static_cast<std::size_t>(i)] = 2;
  }
  r.method = ProjectionMethod::LimitShift;
  if (n == 0) return r;
  const auto t = scattering_tables(config.chi());
  std::vector<double> chi, y;
  for (std::size_t i = 0; i < n; ++i) {
    if (mark[i]) continue;
    r.kept.push_back(static_cast<int>(i));
    double yi = config.y(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double p = t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (mark[j] == 1) yi += 0.5 * p;
      else if (mark[j] == 2) yi -= 0.5 * p;
    }
    chi.push_back(config.chi(i));
    y.push_back(yi);
  }
  r.config_out = SolitonConfig(std::move(chi), std::move(y));
  return r;
}

ProjectionResult extract(const SolitonConfig& config, const std::vector<int>& s, double x_star, double epsilon) {
  const std::size_t n = config.size();
  ProjectionResult r;
  r.method = ProjectionMethod::Extraction;
  r.x_star = x_star;
  r.kept = normalized(s, n);
  if (n == 0) return r;
  ExpandOptions eo;
  eo.epsilon = epsilon;
  const auto sol = expand(config, x_star, eo);
  const auto chi_s = restrict(config.chi(), r.kept);
  const auto X_s = restrict(sol.X, r.kept);
  r.config_out = SolitonConfig(chi_s, contract(chi_s, x_star, X_s, epsilon));
  for (std::size_t i = 0; i < n; ++i) {
    if (std::binary_search(r.kept.begin(), r.kept.end(), static_cast<int>(i))) continue;
    (sol.d[i] >= 0 ? r.removed_right : r.removed_left).push_back(static_cast<int>(i));
  }
  return r;
}

ProjectionResult local_projection(const SolitonConfig& config, std::pair<double, double> cell, double epsilon) {
  const double L = cell.second - cell.first;
  if (!(L >= 2.0 * epsilon)) throw Error(ErrorKind::InvalidArgument, "cell must be at least 2 epsilon wide");
  const double xs = 0.5 * (cell.first + cell.second);
  ExpandOptions eo;
  eo.epsilon = epsilon;
  std::vector<int> s;
  if (!config.empty()) {
    const auto sol = expand(config, xs, eo);
    for (std::size_t i = 0; i < config.size(); ++i)
      if (std::abs(sol.d[i]) <= 0.5 * L) s.push_back(static_cast<int>(i));
  }
  auto r = extract(config, s, xs, epsilon);
  r.method = ProjectionMethod::LocalProjection;
  r.cell = cell;
  return r;
}

ProjectionResult fluid_cell_projection(const SolitonConfig& config, std::pair<double, double> cell, double delta_X,
                                       double epsilon) {
  ScanOptions so;
  so.epsilon = epsilon;
  return fluid_cell_projection(config, cell, scan_effective(config, delta_X, so), epsilon);
}

ProjectionResult fluid_cell_projection(const SolitonConfig& config, std::pair<double, double> cell,
                                       const EffectiveSolution& eff, double epsilon) {
  if (cell.second < cell.first) throw Error(ErrorKind::InvalidArgument, "cell must satisfy a <= b");
  const std::size_t n = config.size();
  if (eff.x_eff.size() != n) throw Error(ErrorKind::LengthMismatch, "effective solution does not match config");
  std::vector<int> sp, sm;
  for (std::size_t i = 0; i < n; ++i) {
    if (eff.x_eff[i] > cell.second) sp.push_back(static_cast<int>(i));
    else if (eff.x_eff[i] < cell.first) sm.push_back(static_cast<int>(i));
  }
  auto r = project_out(config, sp, sm);
  r.method = ProjectionMethod::FluidCell;
  r.cell = cell;
  r.delta_X = eff.delta_X;
  r.effective = eff;
  r.x_star = 0.5 * (cell.first + cell.second);

  const double dx = eff.delta_x;
  if (cell.first + dx < cell.second - dx && n > 0) {
    r.explicit_checked = true;
    const auto ex = extract(config, r.kept, r.x_star, epsilon);
    for (std::size_t k = 0; k < r.kept.size(); ++k)
      r.explicit_deviation = std::max(r.explicit_deviation, std::abs(ex.config_out.y(k) - r.config_out.y(k)));
  }
  if (!r.config_out.empty()) {
    const auto core = extremal_and_core(r.config_out);
    r.core_margin = std::min(core.x_minus - (cell.first - dx), (cell.second + dx) - core.x_plus);
    r.core_inclusion = r.core_margin >= -1e-9;
  }
  return r;
}

bool separated_by(const SolitonConfig& config, const std::vector<int>& s_plus, const std::vector<int>& s_minus,
                  double x_star, double epsilon) {
  ExpandOptions eo;
  eo.epsilon = epsilon;
  const auto sol = expand(config, x_star, eo);
  for (int i : s_plus)
    if (!(sol.d.at(static_cast<std::size_t>(i)) >= epsilon)) return false;
  for (int i : s_minus)
    if (!(sol.d.at(static_cast<std::size_t>(i)) <= -epsilon)) return false;
  return true;
}

}  // namespace soligas
