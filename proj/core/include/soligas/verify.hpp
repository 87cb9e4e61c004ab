#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "soligas/model.hpp"

namespace soligas {

struct TheoremReport {
  std::string theorem;
  std::map<std::string, double> measured;
  std::map<std::string, double> bound;
  std::map<std::string, std::vector<double>> series;  // curves behind the scalars (errors per L, ...)
  std::map<std::string, std::string> metadata;
  bool pass = false;

  bool operator==(const TheoremReport&) const = default;
};

// Least-squares slope of ys against xs.
double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

struct LocalFormOptions {
  std::vector<int> orders{0, 1, 2};
  int grid_points = 201;
  double chi_star = 0.0;  // <= 0: min chi
  double C = 0.0;         // <= 0: max chi; J = [x* - 1/C, x* + 1/C]
  double epsilon = kDefaultEpsilon;
  double floor = 1e-12;           // errors below this are not fitted
  double slope_tolerance = 0.1;   // pass: slope <= -(1 - tol) chi*
  bool two_sided = false;         // also require slope >= -(1 + tol) chi*
  std::size_t min_fit_points = 4;
};

// Cell widths that put each soliton just outside the local cell: L = 2|d_i| - offset for every
// |d_i| > offset, sorted. The projection error at these widths is governed by the excluded edge.
std::vector<double> edge_ladder(const SolitonConfig& config, double x_star, double offset,
                                double epsilon = kDefaultEpsilon);

// sup over J of |d^n (u - Lu)| for each L, log-linear fit of the error against L.
TheoremReport verify_local_form(const SolitonConfig& config, double x_star, std::vector<double> L_list,
                                const LocalFormOptions& opts = {});

struct SupportOptions {
  double chi_star = 0.0;  // <= 0: min chi
  double rate_tolerance = 0.1;
  std::vector<double> distances{1.0, 2.0, 5.0, 10.0};  // in units of 1/chi*
  // envelope D N^kappa exp(E N^alpha - 2 chi* dist); D <= 0 means 8 max(chi)^2
  double D = 0.0, kappa = 1.0, E = 0.0, alpha = 0.0;
};

// Decay of |u| outside the core on both sides.
TheoremReport verify_support(const SolitonConfig& config, const SupportOptions& opts = {});

struct FluidCellOptions {
  std::vector<int> k_list{0, 1, 2};
  double tolerance = 1e-4;
  double epsilon = kDefaultEpsilon;
};

// |(1/L) int_I P_k[u] - (1/L) sum_{x_i in I} chi_i^(2k+1)| and the projected full-line variant.
TheoremReport verify_fluid_cell(const SolitonConfig& config, std::pair<double, double> cell, double delta_X,
                                const FluidCellOptions& opts = {});

struct GaussianTest {
  double centre = 0.0;
  double width = 1.0;
  double amplitude = 1.0;
  double operator()(double x) const;
};

struct WeakLimitOptions {
  double gamma = 0.5;  // delta_X = N^gamma for the effective positions
  double epsilon = kDefaultEpsilon;
};

// |int f(x) P_k[u](N^Lambda x) dx - N^-Lambda sum f(x_i / N^Lambda) chi_i^(2k+1)| along a ladder.
TheoremReport verify_weak_limit(const std::vector<SolitonConfig>& configs, int k, double Lambda,
                                const GaussianTest& f, const WeakLimitOptions& opts = {});

}  // namespace soligas
