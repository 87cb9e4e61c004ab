#include "soligas/hydro.hpp"

#include <algorithm>
#include <cmath>

#include "soligas/error.hpp"
#include "soligas/parallel.hpp"
#include "soligas/positions.hpp"

namespace soligas {

double DensityField::cell_width() const {
  if (x_grid.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two spatial cells");
  return (x_grid.back() - x_grid.front()) / static_cast<double>(x_grid.size() - 1);
}

void DensityField::validate() const {
  if (chi_grid.empty() || x_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty grid");
  if (rho.rows() != static_cast<Eigen::Index>(chi_grid.size()) ||
      rho.cols() != static_cast<Eigen::Index>(x_grid.size()))
    throw Error(ErrorKind::LengthMismatch, "rho shape does not match the grids");
  for (std::size_t i = 1; i < chi_grid.size(); ++i)
    if (!(chi_grid[i] > chi_grid[i - 1])) throw Error(ErrorKind::Ordering, "chi grid must be increasing");
  if (!(chi_grid.front() > 0)) throw Error(ErrorKind::InvalidArgument, "chi grid must be positive");
}

std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
  const std::size_t m = nodes.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double h = nodes[i + 1] - nodes[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

VelocityField effective_velocity(const DensityField& f) {
  f.validate();
  const auto m = static_cast<Eigen::Index>(f.chi_grid.size());
  const auto cells = f.rho.cols();
  const auto w = trapezoid_weights(f.chi_grid);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      if (a != b) phi(a, b) = phase_shift(f.chi_grid[static_cast<std::size_t>(a)], f.chi_grid[static_cast<std::size_t>(b)]);
  Eigen::VectorXd free(m);
  for (Eigen::Index a = 0; a < m; ++a) free(a) = 4.0 * f.chi_grid[static_cast<std::size_t>(a)] * f.chi_grid[static_cast<std::size_t>(a)];

  VelocityField out;
  out.v.resize(m, cells);
  std::vector<double> res(static_cast<std::size_t>(cells), 0.0);
  std::vector<char> singular(static_cast<std::size_t>(cells), 0);
  parallel_for(static_cast<std::size_t>(cells), [&](std::size_t c) {
    const auto ci = static_cast<Eigen::Index>(c);
    Eigen::MatrixXd K(m, m);  // K(a,b) = w_b rho_b phi(a,b)
    for (Eigen::Index b = 0; b < m; ++b) K.col(b) = phi.col(b) * (w[static_cast<std::size_t>(b)] * f.rho(b, ci));
    Eigen::MatrixXd A = -K;
    A.diagonal() += Eigen::VectorXd::Ones(m) + K.rowwise().sum();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-14)) {
      singular[c] = 1;
      return;
    }
    Eigen::VectorXd v = lu.solve(free);
    // one step of iterative refinement
    v += lu.solve(free - A * v);
    out.v.col(ci) = v;
    Eigen::VectorXd r = free + K * v - K.rowwise().sum().cwiseProduct(v) - v;
    res[c] = r.cwiseAbs().maxCoeff() / std::max(1.0, free.cwiseAbs().maxCoeff());
  });
  for (std::size_t c = 0; c < singular.size(); ++c)
    if (singular[c]) throw Error(ErrorKind::SingularSystem, "effective velocity system is singular in cell " + std::to_string(c));
  out.residual = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
  return out;
}

double max_stable_dt(const DensityField& rho, const GhdOptions& opts) {
  const auto v = effective_velocity(rho);
  const double vmax = v.v.cwiseAbs().maxCoeff();
  return vmax > 0 ? opts.cfl * rho.cell_width() / vmax : std::numeric_limits<double>::infinity();
}

DensityField ghd_step(const DensityField& f, double dt, const GhdOptions& opts) {
  f.validate();
  if (!(dt >= 0)) throw Error(ErrorKind::InvalidArgument, "dt must be non-negative");
  const double h = f.cell_width();
  const auto v = effective_velocity(f).v;
  const double vmax = v.cwiseAbs().maxCoeff();
  if (dt * vmax > opts.cfl * h * (1.0 + 1e-12))
    throw Error(ErrorKind::CflViolation, "dt exceeds cfl * cell / max|v_eff|");
  const auto m = f.rho.rows(), cells = f.rho.cols();
  DensityField out = f;
  out.time = f.time + dt;
  const double r = dt / h;
  for (Eigen::Index a = 0; a < m; ++a) {
    // flux through the right face of cell c
    Eigen::VectorXd flux = Eigen::VectorXd::Zero(cells + 1);  // flux(c+1) is the right face of c
    auto face = [&](Eigen::Index lc, Eigen::Index rc) {
      const double vf = 0.5 * (v(a, lc) + v(a, rc));
      return vf * (vf > 0 ? f.rho(a, lc) : f.rho(a, rc));
    };
    for (Eigen::Index c = 0; c + 1 < cells; ++c) flux(c + 1) = face(c, c + 1);
    if (opts.periodic) {
      flux(0) = flux(cells) = face(cells - 1, 0);
    } else {
      // outflow boundaries, no inflow
      flux(0) = std::min(v(a, 0), 0.0) * f.rho(a, 0);
      flux(cells) = std::max(v(a, cells - 1), 0.0) * f.rho(a, cells - 1);
    }
    for (Eigen::Index c = 0; c < cells; ++c) out.rho(a, c) = f.rho(a, c) - r * (flux(c + 1) - flux(c));
  }
  return out;
}

DensityField ghd_evolve(DensityField rho, double t_end, const GhdOptions& opts) {
  while (rho.time < t_end) {
    double dt = max_stable_dt(rho, opts);
    if (!std::isfinite(dt) || rho.time + dt > t_end) dt = t_end - rho.time;
    if (!(dt > 0)) break;
    rho = ghd_step(rho, dt, opts);
  }
  return rho;
}

std::vector<std::vector<double>> microscopic_trajectories(const SolitonConfig& config,
                                                          const std::vector<double>& times, double delta_X,
                                                          double epsilon) {
  std::vector<std::vector<double>> out(times.size());
  ScanOptions so;
  so.epsilon = epsilon;
  parallel_for(times.size(), [&](std::size_t k) {
    out[k] = scan_effective(evolve_impact(config, times[k]), delta_X, so).x_eff;
  });
  return out;
}

namespace {

std::ptrdiff_t bin_of(const std::vector<double>& edges, double v) {
  if (edges.size() < 2 || v < edges.front() || v > edges.back()) return -1;
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  auto k = std::distance(edges.begin(), it) - 1;
  return std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(edges.size()) - 2);
}

std::vector<double> centres(const std::vector<double>& edges) {
  std::vector<double> c;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) c.push_back(0.5 * (edges[i] + edges[i + 1]));
  return c;
}

}  // namespace

EmpiricalDensity empirical_density(const std::vector<double>& positions, const std::vector<double>& chi,
                                   const std::vector<double>& chi_edges, const std::vector<double>& x_edges,
                                   double Lambda) {
  if (positions.size() != chi.size()) throw Error(ErrorKind::LengthMismatch, "positions and chi differ in length");
  if (chi_edges.size() < 2 || x_edges.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least one bin per axis");
  EmpiricalDensity e;
  e.field.chi_grid = centres(chi_edges);
  e.field.x_grid = centres(x_edges);
  e.field.rho = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(chi_edges.size() - 1),
                                      static_cast<Eigen::Index>(x_edges.size() - 1));
  const double N = static_cast<double>(positions.size());
  if (positions.empty()) return e;
  const double scale = std::pow(N, Lambda);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto a = bin_of(chi_edges, chi[i]);
    const auto c = bin_of(x_edges, positions[i] / scale);
    if (a < 0 || c < 0) {
      ++e.overflow;
      continue;
    }
    const double area = (chi_edges[static_cast<std::size_t>(a) + 1] - chi_edges[static_cast<std::size_t>(a)]) *
                        (x_edges[static_cast<std::size_t>(c) + 1] - x_edges[static_cast<std::size_t>(c)]);
    e.field.rho(a, c) += 1.0 / (N * area);
    e.mass += 1.0 / N;
  }
  return e;
}

std::vector<double> displacement_density_hook(const SolitonConfig& config, double x_star, double d,
                                              const std::vector<double>& chi_edges, double epsilon) {
  if (chi_edges.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least one chi bin");
  std::vector<double> out(chi_edges.size() - 1, 0.0);
  if (config.empty()) return out;
  ExpandOptions eo;
  eo.epsilon = epsilon;
  const auto sol = expand(config, x_star, eo);
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (std::abs(d - sol.d[i]) > 0.5 * epsilon) continue;
    const auto a = bin_of(chi_edges, config.chi(i));
    if (a < 0) continue;
    const auto k = static_cast<std::size_t>(a);
    out[k] += 1.0 / (epsilon * (chi_edges[k + 1] - chi_edges[k]));
  }
  return out;
}

}  // namespace soligas
