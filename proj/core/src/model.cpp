#include "soligas/model.hpp"

#include <cmath>
#include <string>

#include "soligas/error.hpp"

namespace soligas {

RegularizedSign::RegularizedSign(double epsilon) : eps_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorKind::InvalidArgument, "regularisation width must be positive");
}

void validate_spectral(const std::vector<double>& chi) {
  for (std::size_t i = 0; i < chi.size(); ++i) {
    if (!(chi[i] > 0.0) || !std::isfinite(chi[i]))
      throw Error(ErrorKind::InvalidArgument,
                  "spectral parameter " + std::to_string(i) + " must be finite and positive");
    if (i > 0) {
      if (chi[i] == chi[i - 1])
        throw Error(ErrorKind::CoincidentSpectral, "chi[" + std::to_string(i - 1) + "] == chi[" +
                                                       std::to_string(i) + "]");
      if (chi[i] < chi[i - 1])
        throw Error(ErrorKind::Ordering, "chi must be strictly increasing (index " +
                                             std::to_string(i) + ")");
    }
  }
}

SolitonConfig::SolitonConfig(std::vector<double> chi, std::vector<double> y)
    : chi_(std::move(chi)), y_(std::move(y)) {
  if (chi_.size() != y_.size())
    throw Error(ErrorKind::LengthMismatch, "chi and y must have equal length");
  validate_spectral(chi_);
  for (double v : y_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "impact parameters must be finite");
}

std::vector<double> SolitonConfig::velocities() const {
  std::vector<double> v(chi_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 4.0 * chi_[i] * chi_[i];
  return v;
}

double phase_shift(double chi_i, double chi_j) {
  if (!(chi_i > 0.0) || !(chi_j > 0.0))
    throw Error(ErrorKind::InvalidArgument, "spectral parameters must be positive");
  if (chi_i == chi_j) throw Error(ErrorKind::CoincidentSpectral, "phase shift undefined at chi_i == chi_j");
  return std::log(std::abs((chi_i - chi_j) / (chi_i + chi_j))) / chi_i;
}

double ScatteringTable::det_omega_closed_form() const {
  double p = 1.0;
  const auto n = s_ratio.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) p *= s_ratio(i, j) * s_ratio(i, j);
  return p;
}

ScatteringTable scattering_tables(const std::vector<double>& chi) {
  validate_spectral(chi);
  const auto n = static_cast<Eigen::Index>(chi.size());
  ScatteringTable t;
  t.phi = Eigen::MatrixXd::Zero(n, n);
  t.s_ratio = Eigen::MatrixXd::Zero(n, n);
  t.omega = Eigen::MatrixXd::Identity(n, n);
  t.phi_row_sum = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double ci = chi[i], cj = chi[j];
      t.s_ratio(i, j) = (ci - cj) / (ci + cj);
      t.phi(i, j) = std::log(std::abs(t.s_ratio(i, j))) / ci;
      t.omega(i, j) = 2.0 * std::sqrt(ci * cj) / (ci + cj);
      t.phi_row_sum(i) += t.phi(i, j);
    }
  }
  return t;
}

std::vector<double> naive_impact(const SolitonConfig& config) {
  const auto t = scattering_tables(config.chi());
  std::vector<double> a(config.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = config.y(i) - 0.5 * t.phi_row_sum(i);
  return a;
}

std::vector<double> impact_from_naive(const std::vector<double>& chi, const std::vector<double>& a) {
  if (chi.size() != a.size()) throw Error(ErrorKind::LengthMismatch, "chi and a must have equal length");
  const auto t = scattering_tables(chi);
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] + 0.5 * t.phi_row_sum(i);
  return y;
}

SolitonConfig evolve_impact(const SolitonConfig& config, double t) {
  std::vector<double> y = config.y();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 4.0 * config.chi(i) * config.chi(i) * t;
  return SolitonConfig(config.chi(), std::move(y));
}

AsymptoticImpacts asymptotic_impacts(const SolitonConfig& config) {
  const auto t = scattering_tables(config.chi());
  const std::size_t n = config.size();
  AsymptoticImpacts out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      s += (j > i ? 1.0 : -1.0) * t.phi(i, j);
    }
    out.plus[i] = config.y(i) + 0.5 * s;
    out.minus[i] = config.y(i) - 0.5 * s;
  }
  return out;
}

std::vector<double> asymptotic_impacts(const SolitonConfig& config, const std::vector<double>& w) {
  if (w.size() != config.size())
    throw Error(ErrorKind::LengthMismatch, "velocity vector must have length n");
  const auto t = scattering_tables(config.chi());
  const std::size_t n = config.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) s += sgn(w[j] - w[i]) * t.phi(i, j);
    x[i] = config.y(i) + 0.5 * s;
  }
  return x;
}

std::vector<double> restrict(const std::vector<double>& v, const std::vector<int>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(v.at(static_cast<std::size_t>(i)));
  return out;
}

std::vector<int> complement(std::size_t n, const std::vector<int>& idx) {
  std::vector<char> mark(n, 0);
  for (int i : idx) mark.at(static_cast<std::size_t>(i)) = 1;
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!mark[i]) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace soligas
