#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace soligas {

inline constexpr double kDefaultEpsilon = 1e-3;

// sgn with the convention sgn(0) = +1.
inline double sgn(double d) noexcept { return d >= 0.0 ? 1.0 : -1.0; }

// Piecewise-linear regularisation of sgn: -1 below -eps, d/eps inside, +1 above.
class RegularizedSign {
 public:
  explicit RegularizedSign(double epsilon = kDefaultEpsilon);
  double epsilon() const noexcept { return eps_; }
  double operator()(double d) const noexcept {
    if (d > eps_) return 1.0;
    if (d < -eps_) return -1.0;
    return d / eps_;
  }

 private:
  double eps_;
};

// N spectral parameters (strictly increasing, positive) and N impact parameters.
class SolitonConfig {
 public:
  SolitonConfig() = default;
  SolitonConfig(std::vector<double> chi, std::vector<double> y);

  std::size_t size() const noexcept { return chi_.size(); }
  bool empty() const noexcept { return chi_.empty(); }
  const std::vector<double>& chi() const noexcept { return chi_; }
  const std::vector<double>& y() const noexcept { return y_; }
  double chi(std::size_t i) const { return chi_[i]; }
  double y(std::size_t i) const { return y_[i]; }
  std::vector<double> velocities() const;

  bool operator==(const SolitonConfig&) const = default;

 private:
  std::vector<double> chi_;
  std::vector<double> y_;
};

// Throws Ordering / CoincidentSpectral / InvalidArgument.
void validate_spectral(const std::vector<double>& chi);

double phase_shift(double chi_i, double chi_j);

struct ScatteringTable {
  Eigen::MatrixXd phi;      // phi(i,j), diagonal 0
  Eigen::MatrixXd s_ratio;  // (chi_i - chi_j)/(chi_i + chi_j)
  Eigen::MatrixXd omega;    // 2 sqrt(chi_i chi_j)/(chi_i + chi_j)
  Eigen::VectorXd phi_row_sum;  // sum_{j != i} phi(i,j)

  std::size_t size() const noexcept { return static_cast<std::size_t>(phi.rows()); }
  // prod_{i<j} S_ij^2
  double det_omega_closed_form() const;
};

ScatteringTable scattering_tables(const std::vector<double>& chi);

// a_i = y_i - 1/2 sum_{j != i} phi_ij and its inverse.
std::vector<double> naive_impact(const SolitonConfig& config);
std::vector<double> impact_from_naive(const std::vector<double>& chi, const std::vector<double>& a);

SolitonConfig evolve_impact(const SolitonConfig& config, double t);

struct AsymptoticImpacts {
  std::vector<double> plus;   // outgoing, t -> +inf
  std::vector<double> minus;  // incoming, t -> -inf
};

AsymptoticImpacts asymptotic_impacts(const SolitonConfig& config);
// x~_i = y_i + 1/2 sum_{j != i} sgn(w_j - w_i) phi_ij
std::vector<double> asymptotic_impacts(const SolitonConfig& config, const std::vector<double>& w);

// Helpers used across modules.
std::vector<double> restrict(const std::vector<double>& v, const std::vector<int>& idx);
std::vector<int> complement(std::size_t n, const std::vector<int>& idx);

}  // namespace soligas
