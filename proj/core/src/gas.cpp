#include "soligas/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "soligas/effective.hpp"
#include "soligas/error.hpp"
#include "soligas/positions.hpp"

namespace soligas {

SolitonConfig generate_ultra_dilute(std::size_t n, const UltraDiluteParams& p) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "ultra-dilute gas needs n >= 1");
  if (!(p.R > 0) || !(p.spacing_exponent > 0)) throw Error(ErrorKind::InvalidArgument, "R and the spacing exponent must be positive");
  if (!(p.chi_star > 0) || !(p.C > p.chi_star)) throw Error(ErrorKind::InvalidArgument, "need 0 < chi_star < C");
  const double N = static_cast<double>(n);
  std::vector<double> chi(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double i = static_cast<double>(k + 1);
    chi[k] = p.chi_star + (p.C - p.chi_star) * i / N;
    y[k] = p.R * (i - N / 2.0) * std::pow(N, 1.0 + p.spacing_exponent);
  }
  return SolitonConfig(std::move(chi), std::move(y));
}

UltraDiluteGas::UltraDiluteGas(std::size_t n, const UltraDiluteParams& params)
    : config_(generate_ultra_dilute(n, params)), params_(params) {
  const auto core = extremal_and_core(config_);
  const auto t = scattering_tables(config_.chi());
  const double eps = params_.epsilon;
  const RegularizedSign sg(eps);
  X_minus_ = core.X_minus;
  x0_ = core.x_minus - eps - 1.0;
  std::vector<double> X = X_minus_;
  double xs = x0_;
  for (std::size_t step = 0; step <= n; ++step) {
    int pivot = -1;
    for (std::size_t j = 0; j < n; ++j)
      if (X[j] >= xs + eps && (pivot < 0 || X[j] < X[static_cast<std::size_t>(pivot)])) pivot = static_cast<int>(j);
    SequentialPiece piece;
    piece.x_lo = xs;
    piece.base = X;
    piece.pivot = pivot;
    if (pivot < 0) {
      piece.x_hi = std::numeric_limits<double>::infinity();
      pieces_.push_back(std::move(piece));
      break;
    }
    const auto pi = static_cast<std::size_t>(pivot);
    piece.x_hi = X[pi] + eps;
    // Values at the end of the piece, where sgn_eps(-eps) = -1. Evaluating sg(X_i - (X_i + eps))
    // in floating point can land just inside the band and spoil the shift by ulp(X)/eps.
    for (std::size_t j = 0; j < n; ++j)
      if (j != pi) X[j] -= t.phi(static_cast<Eigen::Index>(j), pivot);
    xs = piece.x_hi;
    pieces_.push_back(std::move(piece));
  }
}

std::vector<double> UltraDiluteGas::breakpoints() const {
  std::vector<double> b;
  for (const auto& p : pieces_)
    if (p.pivot >= 0) b.push_back(p.x_hi);
  return b;
}

std::vector<double> UltraDiluteGas::positions(double x_star) const {
  if (x_star < x0_) return X_minus_;
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x_star,
                             [](double x, const SequentialPiece& p) { return x < p.x_hi; });
  if (it == pieces_.end()) --it;
  std::vector<double> X = it->base;
  if (it->pivot < 0) return X;
  const RegularizedSign sg(params_.epsilon);
  const auto t = scattering_tables(config_.chi());
  const auto pi = static_cast<std::size_t>(it->pivot);
  for (std::size_t j = 0; j < X.size(); ++j)
    if (j != pi) X[j] -= 0.5 * t.phi(static_cast<Eigen::Index>(j), it->pivot) * (1.0 - sg(it->base[pi] - x_star));
  return X;
}

SolitonConfig generate_uniform(std::size_t n, double ell, std::pair<double, double> chi_range, std::uint64_t seed) {
  if (!(ell > 0)) throw Error(ErrorKind::InvalidArgument, "ell must be positive");
  if (!(chi_range.first > 0) || !(chi_range.second > chi_range.first))
    throw Error(ErrorKind::InvalidArgument, "chi range must satisfy 0 < lo < hi");
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<std::pair<double, double>> pairs(n);
  for (auto& [c, y] : pairs) {
    c = chi_range.first + (chi_range.second - chi_range.first) * unit();
    y = ell * (unit() - 0.5);
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> chi(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    chi[i] = pairs[i].first;
    y[i] = pairs[i].second;
  }
  return SolitonConfig(std::move(chi), std::move(y));
}

SpectralCheck check_spectral(const std::vector<double>& chi, const AssumptionExponents& e,
                             const AssumptionConstants& c) {
  SpectralCheck s;
  const double N = static_cast<double>(chi.size());
  s.gap_bound = std::exp(-c.A * std::pow(N, e.alpha / 2.0));
  s.max_bound = c.C * std::pow(N, e.beta);
  if (chi.empty()) return s;
  std::vector<double> sorted = chi;
  std::sort(sorted.begin(), sorted.end());
  s.min_chi = sorted.front();
  s.max_chi = sorted.back();
  s.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) s.min_gap = std::min(s.min_gap, sorted[i] - sorted[i - 1]);
  s.pass = s.min_chi >= c.chi_star && s.max_chi <= s.max_bound && (sorted.size() < 2 || s.min_gap >= s.gap_bound);
  return s;
}

double displacement_density(const std::vector<double>& d, double radius) {
  std::size_t count = 0;
  for (double v : d)
    if (std::abs(v) <= radius) ++count;
  return static_cast<double>(count) / (2.0 * radius);
}

AssumptionReport check_assumptions(const SolitonConfig& config, const AssumptionExponents& e,
                                   const AssumptionConstants& c, std::vector<double> grid, double epsilon) {
  AssumptionReport r;
  r.n = config.size();
  r.spectral = check_spectral(config.chi(), e, c);
  const double N = static_cast<double>(r.n);
  r.small_bound = c.U * std::pow(N, e.sigma / 2.0);
  r.density_bound = c.D * std::pow(N, e.nu);
  r.density_d_min = std::max(c.B * std::pow(N, e.eta + e.mu), epsilon);
  r.variation_bound = c.G * std::pow(N, e.gamma + e.epsilon);
  if (r.n == 0) return r;

  ExpandOptions eo;
  eo.epsilon = epsilon;
  PositionPath path(config, eo);
  if (grid.empty()) {
    const double a = path.core().x_minus - 1.0, b = path.core().x_plus + 1.0;
    for (int k = 0; k <= 200; ++k) grid.push_back(a + (b - a) * k / 200.0);
  }
  std::sort(grid.begin(), grid.end());
  double best_margin = std::numeric_limits<double>::infinity();
  for (double xs : grid) {
    Eigen::VectorXd dv;
    try {
      dv = path.displacements(xs);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::SolverFailure) throw;
      r.failed_x_star.push_back(xs);
      continue;
    }
    ++r.grid_points;
    std::vector<double> d(dv.data(), dv.data() + dv.size());
    std::size_t small = 0;
    for (double v : d)
      if (std::abs(v) < epsilon) ++small;
    r.max_small = std::max(r.max_small, small);
    // rho_d is maximal right at some |d_i| (or at d_min); sample those plus a log-spaced sweep
    std::vector<double> radii{r.density_d_min};
    for (double v : d)
      if (std::abs(v) >= r.density_d_min) radii.push_back(std::abs(v));
    const double top = std::max(r.density_d_min, *std::max_element(radii.begin(), radii.end())) * 2.0;
    for (int k = 0; k < 32; ++k) radii.push_back(r.density_d_min * std::pow(top / r.density_d_min, k / 31.0));
    for (double rad : radii) {
      const double rho = displacement_density(d, rad);
      r.max_density = std::max(r.max_density, rho);
      const double margin = r.density_bound - rho;
      if (margin < best_margin) {
        best_margin = margin;
        r.worst_x_star = xs;
      }
    }
  }
  r.accumulation_ok = static_cast<double>(r.max_small) <= r.small_bound;
  r.density_ok = r.max_density <= r.density_bound;

  const double dX = std::max(std::pow(N, e.gamma), epsilon);
  ScanOptions so;
  so.epsilon = epsilon;
  try {
    r.delta_x = scan_effective(config, dX, so).delta_x;
    r.variation_ok = r.delta_x <= r.variation_bound;
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::SolverFailure) throw;
    r.variation_ok = false;
  }
  return r;
}

}  // namespace soligas
