#pragma once

#include <vector>

#include <Eigen/Dense>

#include "soligas/effective.hpp"
#include "soligas/model.hpp"

namespace soligas {

// rho(a, c): density at spectral node a and spatial cell c (cell centres on a uniform grid).
struct DensityField {
  std::vector<double> chi_grid;
  std::vector<double> x_grid;
  Eigen::MatrixXd rho;
  double time = 0.0;

  double cell_width() const;
  void validate() const;
};

struct VelocityField {
  Eigen::MatrixXd v;      // same shape as rho
  double residual = 0.0;  // sup-norm residual of the discretized equation
};

// Trapezoid weights on a (possibly non-uniform) sorted grid.
std::vector<double> trapezoid_weights(const std::vector<double>& nodes);

// v_a = 4 chi_a^2 + sum_b w_b rho_b phi(a,b) (v_b - v_a) per cell. The diagonal drops out
// because it multiplies v_a - v_a.
VelocityField effective_velocity(const DensityField& rho);

struct GhdOptions {
  double cfl = 0.9;
  bool periodic = true;
};

double max_stable_dt(const DensityField& rho, const GhdOptions& opts = {});
DensityField ghd_step(const DensityField& rho, double dt, const GhdOptions& opts = {});
// Steps to t_end with the largest stable uniform step.
DensityField ghd_evolve(DensityField rho, double t_end, const GhdOptions& opts = {});

// x_eff(t) for each time (rows follow `times`).
std::vector<std::vector<double>> microscopic_trajectories(const SolitonConfig& config,
                                                          const std::vector<double>& times, double delta_X,
                                                          double epsilon = kDefaultEpsilon);

struct EmpiricalDensity {
  DensityField field;
  std::size_t overflow = 0;  // points outside the bins
  double mass = 0.0;         // sum rho * bin area
};

// Histogram of (chi_i, x_i / N^Lambda) normalized by N times the bin area; bins given as edges.
EmpiricalDensity empirical_density(const std::vector<double>& positions, const std::vector<double>& chi,
                                   const std::vector<double>& chi_edges, const std::vector<double>& x_edges,
                                   double Lambda = 1.0);

// Measurement hook: per chi bin, the number of solitons with |d - d_i| <= eps/2 divided by
// eps times the bin width. No evolution equation is attached to it.
std::vector<double> displacement_density_hook(const SolitonConfig& config, double x_star, double d,
                                              const std::vector<double>& chi_edges,
                                              double epsilon = kDefaultEpsilon);

}  // namespace soligas
