#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "soligas/model.hpp"

namespace soligas {

struct UltraDiluteParams {
  double R = 1.0;
  double spacing_exponent = 0.1;  // y spacing R N^(1 + spacing_exponent)
  double chi_star = 1.0;
  double C = 2.0;
  double epsilon = kDefaultEpsilon;  // sign regularization used by the sequential table
};

// Piecewise table of the sequential construction: on [x_lo, x_hi) soliton `pivot` is the one
// being crossed and X_j(x*) = base_j - 1/2 phi_{j,pivot} (1 - sgn_eps(base_pivot - x*)).
struct SequentialPiece {
  double x_lo = 0.0;
  double x_hi = 0.0;
  int pivot = -1;  // -1: terminal piece (constant)
  std::vector<double> base;
};

class UltraDiluteGas {
 public:
  UltraDiluteGas(std::size_t n, const UltraDiluteParams& params = {});

  const SolitonConfig& config() const noexcept { return config_; }
  const UltraDiluteParams& params() const noexcept { return params_; }
  const std::vector<SequentialPiece>& pieces() const noexcept { return pieces_; }
  // Event points x*^(n), n >= 1.
  std::vector<double> breakpoints() const;
  // X(x*) from the sequential construction (exact in the ultra-dilute regime).
  std::vector<double> positions(double x_star) const;

 private:
  SolitonConfig config_;
  UltraDiluteParams params_;
  std::vector<double> X_minus_;
  double x0_ = 0.0;
  std::vector<SequentialPiece> pieces_;
};

SolitonConfig generate_ultra_dilute(std::size_t n, const UltraDiluteParams& params = {});

// chi iid uniform on chi_range (sorted), y iid uniform on [-ell/2, ell/2]; mt19937_64.
SolitonConfig generate_uniform(std::size_t n, double ell, std::pair<double, double> chi_range, std::uint64_t seed);

struct AssumptionExponents {
  double alpha = 0.1;
  double beta = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double eta = 0.0;
  double gamma = 0.5;
  double epsilon = 0.1;
};

struct AssumptionConstants {
  double chi_star = 1.0;
  double A = 1.0;
  double B = 1.0;
  double C = 2.0;
  double D = 1.0;
  double U = 1.0;
  double G = 1.0;
};

struct SpectralCheck {
  double min_chi = 0.0, min_gap = 0.0, max_chi = 0.0;
  double gap_bound = 0.0, max_bound = 0.0;
  bool pass = true;
};

struct AssumptionReport {
  std::size_t n = 0;
  SpectralCheck spectral;
  std::size_t max_small = 0;  // max over grid of |{|d_i| < eps}|
  double small_bound = 0.0;
  bool accumulation_ok = true;
  double max_density = 0.0;  // max over grid and d >= d_min of rho_d(d)
  double density_bound = 0.0;
  double density_d_min = 0.0;
  bool density_ok = true;
  double delta_x = 0.0;  // effective imprecision at delta_X = N^gamma
  double variation_bound = 0.0;
  bool variation_ok = true;
  double worst_x_star = 0.0;  // grid point with the tightest density margin
  std::size_t grid_points = 0;
  std::vector<double> failed_x_star;  // solver failures
  bool pass() const noexcept {
    return spectral.pass && accumulation_ok && density_ok && variation_ok && failed_x_star.empty();
  }
};

// Works on raw vectors so that degenerate spectra can be reported rather than rejected.
SpectralCheck check_spectral(const std::vector<double>& chi, const AssumptionExponents& e,
                             const AssumptionConstants& c);

// rho_d(d) = |{i : |d_i| <= d}| / (2d)
double displacement_density(const std::vector<double>& d, double radius);

// Empty grid: 201 points over [x- - 1, x+ + 1].
AssumptionReport check_assumptions(const SolitonConfig& config, const AssumptionExponents& e,
                                   const AssumptionConstants& c, std::vector<double> x_star_grid = {},
                                   double epsilon = kDefaultEpsilon);

}  // namespace soligas
