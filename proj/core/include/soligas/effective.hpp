#pragma once

#include <vector>

#include "soligas/model.hpp"
#include "soligas/positions.hpp"

namespace soligas {

struct ScanOptions {
  double epsilon = kDefaultEpsilon;
  double tol_x = 1e-6;
  double margin = -1.0;  // negative: 2 (delta_X + epsilon)
};

struct ScanMetadata {
  double x_begin = 0.0;
  double x_end = 0.0;
  std::size_t segments = 0;
  std::size_t folds = 0;
  std::size_t events = 0;
  double tol_x = 0.0;
  bool converged = true;
};

struct EffectiveSolution {
  double delta_X = 0.0;
  std::vector<double> x_left, x_right, x_eff;
  double delta_x = 0.0;
  ScanMetadata scan;
};

// Crossing bounds are located exactly on the piecewise-affine position path: x_left is the first
// x* with X_i(x*) <= x* + delta_X, x_right the last x* with X_i(x*) >= x* - delta_X.
EffectiveSolution scan_effective(const SolitonConfig& config, double delta_X, const ScanOptions& opts = {});

// X_i(x*) sampled on a grid, rows = grid points.
std::vector<std::vector<double>> trajectory(const SolitonConfig& config, const std::vector<double>& x_grid,
                                            double epsilon = kDefaultEpsilon);

struct BetheReport {
  std::vector<double> delta;  // y_i - x_i - 1/2 sum of resolved terms
  std::vector<double> slack;  // sum of |phi_ij|/2 over unresolved (close) pairs
  double bound = 0.0;         // delta_X + delta_x
  double worst_excess = 0.0;  // max_i (|delta_i| - slack_i - bound)
  bool pass = true;
};

BetheReport bethe_residual(const SolitonConfig& config, const EffectiveSolution& eff);

struct ImplicationReport {
  std::size_t points = 0;
  std::size_t violations = 0;  // consistency implications broken on the grid
  bool core_inclusion = true;  // core within [min x - dx, max x + dx]
  double core_margin = 0.0;    // min distance by which the inclusion holds (negative if broken)
  bool pass() const noexcept { return violations == 0 && core_inclusion; }
};

// Checks x_i < x* - dx => X_i < x* - DX and the mirror on the grid, plus the core inclusion.
ImplicationReport check_effective_implications(const SolitonConfig& config, const EffectiveSolution& eff,
                                               const std::vector<double>& x_grid,
                                               double epsilon = kDefaultEpsilon);

}  // namespace soligas
