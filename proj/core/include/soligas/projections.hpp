#pragma once

#include <string>
#include <utility>
#include <vector>

#include "soligas/effective.hpp"
#include "soligas/model.hpp"

namespace soligas {

enum class ProjectionMethod { LimitShift, Extraction, LocalProjection, FluidCell };
const char* to_string(ProjectionMethod m) noexcept;

struct ProjectionResult {
  std::vector<int> kept;           // s, increasing
  std::vector<int> removed_right;  // s+
  std::vector<int> removed_left;   // s-
  SolitonConfig config_out;
  ProjectionMethod method = ProjectionMethod::LimitShift;
  double x_star = 0.0;                   // extraction point (extraction / local / fluid cell)
  std::pair<double, double> cell{0, 0};  // local / fluid cell
  double delta_X = 0.0;

  // fluid cell only
  EffectiveSolution effective;
  bool explicit_checked = false;    // cell wide enough for the extraction identity
  double explicit_deviation = 0.0;  // max |y' - y^(s, centre)|
  double core_margin = 0.0;         // core(config_out) inside [I- - dx, I+ + dx] by this margin
  bool core_inclusion = true;
};

// Sends s+ to +infinity and s- to -infinity; the kept solitons get
// y'_i = y_i + 1/2 sum_{s+} phi_ij - 1/2 sum_{s-} phi_ij.
ProjectionResult project_out(const SolitonConfig& config, const std::vector<int>& s_plus,
                             const std::vector<int>& s_minus);

// y^(s,x*) = C_{chi_s, x*}(E_{chi, x*}(y)_s)
ProjectionResult extract(const SolitonConfig& config, const std::vector<int>& s, double x_star,
                         double epsilon = kDefaultEpsilon);

// Keeps {i : |d_i| <= L/2} at the cell centre.
ProjectionResult local_projection(const SolitonConfig& config, std::pair<double, double> cell,
                                  double epsilon = kDefaultEpsilon);

// Keeps solitons whose effective position lies in the (closed) cell.
ProjectionResult fluid_cell_projection(const SolitonConfig& config, std::pair<double, double> cell,
                                       double delta_X, double epsilon = kDefaultEpsilon);
ProjectionResult fluid_cell_projection(const SolitonConfig& config, std::pair<double, double> cell,
                                       const EffectiveSolution& eff, double epsilon = kDefaultEpsilon);

// Whether (s+, s-) is separated at x*: d_i >= eps on s+, d_i <= -eps on s-.
bool separated_by(const SolitonConfig& config, const std::vector<int>& s_plus, const std::vector<int>& s_minus,
                  double x_star, double epsilon = kDefaultEpsilon);

}  // namespace soligas
