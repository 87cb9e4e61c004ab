#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "soligas/model.hpp"

namespace soligas {

enum class SignRegion { Below, Band, Above };

const char* to_string(SignRegion r) noexcept;
SignRegion region_of(double d, double epsilon) noexcept;

struct PositionSolution {
  double x_star = 0.0;
  std::vector<double> X;
  std::vector<double> d;
  std::vector<SignRegion> pattern;
  double residual = 0.0;
  int iterations = 0;
  std::string method;  // closed_form_left, closed_form_right, continuation, active_set, fixed_point
};

struct CoreInterval {
  double x_minus = 0.0;
  double x_plus = 0.0;
  std::vector<double> X_minus;
  std::vector<double> X_plus;
};

// y_i = X_i - 1/2 sum_{j != i} sgn_eps(X_j - x*) phi_ij
std::vector<double> contract(const std::vector<double>& chi, double x_star, const std::vector<double>& X,
                             double epsilon = kDefaultEpsilon);

CoreInterval extremal_and_core(const SolitonConfig& config);

// Closed-form displacements for z = y - x* when the separation condition holds for s (solitons
// forced to d <= -eps); nullopt otherwise.
std::optional<std::vector<double>> separated_displacements(const std::vector<double>& chi,
                                                           const std::vector<double>& z,
                                                           const std::vector<int>& s,
                                                           double epsilon = kDefaultEpsilon);

struct ExpandOptions {
  double epsilon = kDefaultEpsilon;
  int max_iterations = 10000;
  double tolerance = 1e-10;
};

// Canonical solution of the magnifying-glass equations; see PositionPath for the branch choice.
PositionSolution expand(const std::vector<double>& chi, double x_star, const std::vector<double>& y,
                        const ExpandOptions& opts = {});
PositionSolution expand(const SolitonConfig& config, double x_star, const ExpandOptions& opts = {});

// Solves for a given x* from a warm start by sign-pattern iteration, falling back to damped
// fixed-point iteration. Throws SolverFailure with the best residual on non-convergence.
PositionSolution solve_active_set(const std::vector<double>& chi, double x_star, const std::vector<double>& y,
                                  const std::vector<double>& d_guess, const ExpandOptions& opts = {});

// Piecewise-affine solution path of the magnifying-glass equations as x* increases.
//
// In each sign pattern d(x*) is affine, so the path is traced event by event: a segment ends
// exactly where some displacement reaches +-eps. The traced curve can fold back in x*; the
// canonical solution at x* is the first point of the curve that reaches x* beyond every earlier
// x* (the continuation branch), which makes the map history-dependent and possibly
// discontinuous at folds.
class PositionPath {
 public:
  struct Segment {
    double x0 = 0.0;  // canonical validity [x0, x1]
    double x1 = 0.0;
    double xa = 0.0;  // anchor: d(x) = da - (x - xa) q
    Eigen::VectorXd da;
    Eigen::VectorXd q;
    std::vector<SignRegion> pattern;
    bool jump_at_start = false;  // discontinuity at x0 (fold)
  };

  PositionPath(std::vector<double> chi, std::vector<double> y, const ExpandOptions& opts = {});
  PositionPath(const SolitonConfig& config, const ExpandOptions& opts = {});

  double start() const noexcept { return x_start_; }
  const CoreInterval& core() const noexcept { return core_; }
  // Extends the canonical path to cover x*; throws SolverFailure if tracing breaks down.
  void extend_to(double x_star);
  PositionSolution at(double x_star);
  Eigen::VectorXd displacements(double x_star);

  const std::vector<Segment>& segments() const noexcept { return canon_; }
  std::size_t events() const noexcept { return events_; }
  std::size_t folds() const noexcept { return folds_; }
  double covered_until() const noexcept { return xmax_; }
  bool finished() const noexcept { return finished_; }

 private:
  void step();
  void solve_pattern(const std::vector<SignRegion>& pat, Eigen::VectorXd& q, Eigen::VectorXd& p) const;
  PositionSolution make_solution(double x_star, const Eigen::VectorXd& d, const char* method, int iters) const;

  std::vector<double> chi_, y_;
  ExpandOptions opts_;
  Eigen::MatrixXd phi_;
  CoreInterval core_;
  double x_start_ = 0.0;

  // tracing state
  std::vector<SignRegion> pat_;
  Eigen::VectorXd d_, q_;
  double x_ = 0.0;
  int dir_ = 1;
  double xmax_ = 0.0;
  bool finished_ = false;
  bool pending_jump_ = false;
  std::size_t events_ = 0, folds_ = 0, zero_steps_ = 0;
  std::vector<Segment> canon_;
};

}  // namespace soligas
