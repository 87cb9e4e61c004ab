#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "soligas/tau.hpp"

namespace soligas {

// P0 = u/4, P1 = 3u^2/16, P2 = (5/64)(2u^3 - u_x^2); each integrates to sum chi^(2k+1).
double density_at(const FieldJet& jet, int k);
int density_degree(int k);        // 2k + 2
int density_jet_order(int k);     // derivative order the polynomial needs

// A local observable F(u, u_x, ..., d^order u) with F(0) = 0.
struct Observable {
  std::string name;
  int order = 0;
  std::function<double(const FieldJet&)> eval;

  static Observable conserved(int k);
  // Bounded Lipschitz functionals: "tanh_u", "clip_u" (clamp u to [-1,1]), "tanh_ux".
  static Observable bounded(const std::string& tag);
};

struct QuadratureOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  int max_subdivisions = 2000;
  double tail_radius = 40.0;  // full line: core +/- tail_radius / chi_min
};

struct IntegrationResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
  double a = 0.0, b = 0.0;
};

using Interval = std::pair<double, double>;

// Integral of an observable over [a,b]; nullopt interval means the full line.
IntegrationResult integrate_observable(const SolitonConfig& config, const Observable& obs,
                                       std::optional<Interval> interval, const QuadratureOptions& opts = {});
IntegrationResult integrate_density(const SolitonConfig& config, int k, std::optional<Interval> interval = std::nullopt,
                                    const QuadratureOptions& opts = {});
double fluid_cell_mean(const SolitonConfig& config, const Observable& obs, Interval cell,
                       const QuadratureOptions& opts = {});

// Adaptive Gauss-Kronrod over [a,b] split into panels no wider than `panel`.
IntegrationResult integrate_panels(const std::function<double(double)>& f, double a, double b, double panel,
                                   const QuadratureOptions& opts = {});

}  // namespace soligas
