#include "soligas/positions.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "soligas/error.hpp"

namespace soligas {

const char* to_string(SignRegion r) noexcept {
  switch (r) {
    case SignRegion::Below: return "below";
    case SignRegion::Band: return "band";
    case SignRegion::Above: return "above";
  }
  return "?";
}

SignRegion region_of(double d, double epsilon) noexcept {
  if (d < -epsilon) return SignRegion::Below;
  if (d > epsilon) return SignRegion::Above;
  return SignRegion::Band;
}

namespace {

Eigen::MatrixXd phi_matrix(const std::vector<double>& chi) { return scattering_tables(chi).phi; }

std::vector<SignRegion> regions(const Eigen::VectorXd& d, double eps) {
  std::vector<SignRegion> r(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) r[static_cast<std::size_t>(i)] = region_of(d(i), eps);
  return r;
}

// ||C(d) - (y - x*)||_inf
double displacement_residual(const Eigen::MatrixXd& phi, const std::vector<double>& y, double x_star,
                             const Eigen::VectorXd& d, const RegularizedSign& sg) {
  const auto n = d.size();
  Eigen::VectorXd s(n);
  for (Eigen::Index j = 0; j < n; ++j) s(j) = sg(d(j));
  Eigen::VectorXd c = d - 0.5 * (phi * s);
  double r = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) r = std::max(r, std::abs(c(i) - (y[static_cast<std::size_t>(i)] - x_star)));
  return r;
}

// Affine law d = p - x* q for a fixed sign pattern. The pattern matrix M = I - Phi E_B / (2 eps)
// only differs from I in the band columns, so it is block lower triangular: the band block is
// solved by LU and the rest follows explicitly. Full pivoted LU would mix the O(1/eps) band
// column into every row and lose about cond(M) * ulp.
class PatternSystem {
 public:
  PatternSystem(const Eigen::MatrixXd& phi, const std::vector<double>& y, const std::vector<SignRegion>& pat,
                double eps) {
    const auto n = phi.rows();
    c = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      switch (pat[static_cast<std::size_t>(j)]) {
        case SignRegion::Band: band_.push_back(j); break;
        case SignRegion::Above: c += 0.5 * phi.col(j); break;
        case SignRegion::Below: c -= 0.5 * phi.col(j); break;
      }
    }
    const auto nb = static_cast<Eigen::Index>(band_.size());
    coupling_.resize(n, nb);  // Phi(:, B) / (2 eps)
    for (Eigen::Index b = 0; b < nb; ++b) coupling_.col(b) = phi.col(band_[static_cast<std::size_t>(b)]) / (2.0 * eps);
    if (nb > 0) {
      Eigen::MatrixXd mbb = Eigen::MatrixXd::Identity(nb, nb);
      for (Eigen::Index a = 0; a < nb; ++a) mbb.row(a) -= coupling_.row(band_[static_cast<std::size_t>(a)]);
      lu_.compute(mbb);
      ok_ = lu_.rcond() > 1e-14;
    }
  }

  bool ok() const noexcept { return ok_; }

  // Solves M z = rhs.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const auto nb = static_cast<Eigen::Index>(band_.size());
    if (nb == 0) return rhs;
    Eigen::VectorXd rb(nb);
    for (Eigen::Index a = 0; a < nb; ++a) rb(a) = rhs(band_[static_cast<std::size_t>(a)]);
    Eigen::VectorXd zb = lu_.solve(rb);
    zb += lu_.solve(rb - band_matrix_times(zb));  // one refinement step
    Eigen::VectorXd z = rhs + coupling_ * zb;
    for (Eigen::Index a = 0; a < nb; ++a) z(band_[static_cast<std::size_t>(a)]) = zb(a);
    return z;
  }

  Eigen::VectorXd c;

 private:
  Eigen::VectorXd band_matrix_times(const Eigen::VectorXd& zb) const {
    const auto nb = static_cast<Eigen::Index>(band_.size());
    Eigen::VectorXd out = zb;
    for (Eigen::Index a = 0; a < nb; ++a) out(a) -= coupling_.row(band_[static_cast<std::size_t>(a)]).dot(zb);
    return out;
  }

  std::vector<Eigen::Index> band_;
  Eigen::MatrixXd coupling_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool ok_ = true;
};

}  // namespace

std::vector<double> contract(const std::vector<double>& chi, double x_star, const std::vector<double>& X,
                             double epsilon) {
  if (chi.size() != X.size()) throw Error(ErrorKind::LengthMismatch, "chi and X must have equal length");
  const auto t = scattering_tables(chi);
  const RegularizedSign sg(epsilon);
  const std::size_t n = chi.size();
  std::vector<double> s(n), y(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = sg(X[j] - x_star);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) acc += s[j] * t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    y[i] = X[i] - 0.5 * acc;
  }
  return y;
}

CoreInterval extremal_and_core(const SolitonConfig& config) {
  if (config.empty()) throw Error(ErrorKind::InvalidArgument, "core requires at least one soliton");
  const auto t = scattering_tables(config.chi());
  CoreInterval c;
  const std::size_t n = config.size();
  c.X_minus.resize(n);
  c.X_plus.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.X_minus[i] = config.y(i) + 0.5 * t.phi_row_sum(static_cast<Eigen::Index>(i));
    c.X_plus[i] = config.y(i) - 0.5 * t.phi_row_sum(static_cast<Eigen::Index>(i));
  }
  c.x_minus = *std::min_element(c.X_minus.begin(), c.X_minus.end());
  c.x_plus = *std::max_element(c.X_plus.begin(), c.X_plus.end());
  return c;
}

std::optional<std::vector<double>> separated_displacements(const std::vector<double>& chi,
                                                           const std::vector<double>& z,
                                                           const std::vector<int>& s, double epsilon) {
  if (chi.size() != z.size()) throw Error(ErrorKind::LengthMismatch, "chi and z must have equal length");
  const auto t = scattering_tables(chi);
  const std::size_t n = chi.size();
  std::vector<double> sign(n, -1.0);
  for (int i : s) sign.at(static_cast<std::size_t>(i)) = 1.0;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double half = 0.5 * t.phi_row_sum(static_cast<Eigen::Index>(i));
    if (sign[i] > 0 && !(z[i] <= half - epsilon)) return std::nullopt;
    if (sign[i] < 0 && !(z[i] >= -half + epsilon)) return std::nullopt;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) acc += sign[j] * t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    d[i] = z[i] - 0.5 * acc;
  }
  return d;
}

// ---------------------------------------------------------------------------

PositionPath::PositionPath(const SolitonConfig& config, const ExpandOptions& opts)
    : PositionPath(config.chi(), config.y(), opts) {}

PositionPath::PositionPath(std::vector<double> chi, std::vector<double> y, const ExpandOptions& opts)
    : chi_(std::move(chi)), y_(std::move(y)), opts_(opts) {
  if (chi_.size() != y_.size()) throw Error(ErrorKind::LengthMismatch, "chi and y must have equal length");
  RegularizedSign check(opts_.epsilon);
  (void)check;
  const auto n = static_cast<Eigen::Index>(chi_.size());
  if (n == 0) {
    finished_ = true;
    xmax_ = std::numeric_limits<double>::infinity();
    return;
  }
  phi_ = phi_matrix(chi_);
  core_ = extremal_and_core(SolitonConfig(chi_, y_));
  x_start_ = core_.x_minus - opts_.epsilon - 1.0;
  x_ = xmax_ = x_start_;
  pat_.assign(static_cast<std::size_t>(n), SignRegion::Above);
  d_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d_(i) = core_.X_minus[static_cast<std::size_t>(i)] - x_start_;
  q_ = Eigen::VectorXd::Ones(n);
  dir_ = 1;
}

void PositionPath::solve_pattern(const std::vector<SignRegion>& pat, Eigen::VectorXd& q, Eigen::VectorXd& p) const {
  const PatternSystem sys(phi_, y_, pat, opts_.epsilon);
  if (!sys.ok()) throw Error(ErrorKind::SolverFailure, "singular sign-pattern system during continuation");
  q = sys.solve(Eigen::VectorXd::Ones(phi_.rows()));
  p = sys.solve(sys.c);
}

void PositionPath::step() {
  const auto n = d_.size();
  const double eps = opts_.epsilon;
  double tmin = std::numeric_limits<double>::infinity();
  Eigen::Index k = -1;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = -dir_ * q_(j);  // dd_j/dt
    double t = std::numeric_limits<double>::infinity();
    switch (pat_[static_cast<std::size_t>(j)]) {
      case SignRegion::Above:
        if (r < 0) t = (d_(j) - eps) / -r;
        break;
      case SignRegion::Below:
        if (r > 0) t = (-eps - d_(j)) / r;
        break;
      case SignRegion::Band:
        if (r > 0) t = (eps - d_(j)) / r;
        else if (r < 0) t = (d_(j) + eps) / -r;
        break;
    }
    t = std::max(t, 0.0);
    if (t < tmin) {
      tmin = t;
      k = j;
    }
  }

  if (k < 0) {
    if (dir_ < 0) throw Error(ErrorKind::SolverFailure, "continuation path escaped to x* = -infinity");
    Segment s;
    s.x0 = std::max(x_, xmax_);
    s.x1 = std::numeric_limits<double>::infinity();
    s.xa = x_;
    s.da = d_;
    s.q = q_;
    s.pattern = pat_;
    s.jump_at_start = pending_jump_ || x_ < xmax_;
    canon_.push_back(std::move(s));
    xmax_ = std::numeric_limits<double>::infinity();
    finished_ = true;
    return;
  }

  const double x_new = x_ + dir_ * tmin;
  if (dir_ > 0 && x_new > xmax_) {
    Segment s;
    s.x0 = std::max(x_, xmax_);
    s.x1 = x_new;
    s.xa = x_;
    s.da = d_;
    s.q = q_;
    s.pattern = pat_;
    s.jump_at_start = pending_jump_ || x_ < xmax_;
    pending_jump_ = false;
    canon_.push_back(std::move(s));
    xmax_ = x_new;
  }

  ++events_;
  zero_steps_ = tmin == 0.0 ? zero_steps_ + 1 : 0;
  if (zero_steps_ > static_cast<std::size_t>(4 * n + 16))
    throw Error(ErrorKind::SolverFailure, "continuation stalled at a degenerate event");
  if (events_ > static_cast<std::size_t>(opts_.max_iterations))
    throw Error(ErrorKind::SolverFailure, "continuation exceeded the event limit");

  const SignRegion old = pat_[static_cast<std::size_t>(k)];
  const double r = -dir_ * q_(k);
  SignRegion now;
  if (old == SignRegion::Above || old == SignRegion::Below) now = SignRegion::Band;
  else now = r > 0 ? SignRegion::Above : SignRegion::Below;
  pat_[static_cast<std::size_t>(k)] = now;

  Eigen::VectorXd q, p;
  solve_pattern(pat_, q, p);
  const double qk = q(k);
  if (qk == 0.0) throw Error(ErrorKind::SolverFailure, "degenerate crossing direction");
  const int sq = qk > 0 ? 1 : -1;
  int dir;
  if (now == SignRegion::Band) dir = (old == SignRegion::Above) ? sq : -sq;
  else dir = (now == SignRegion::Above) ? -sq : sq;

  if (dir_ > 0 && dir < 0) {
    ++folds_;
    pending_jump_ = true;
  }
  x_ = x_new;
  d_ = p - x_ * q;
  q_ = q;
  dir_ = dir;
}

void PositionPath::extend_to(double x_star) {
  while (!finished_ && xmax_ < x_star) step();
}

Eigen::VectorXd PositionPath::displacements(double x_star) {
  const auto n = static_cast<Eigen::Index>(chi_.size());
  if (n == 0) return Eigen::VectorXd();
  if (x_star <= x_start_) {
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = core_.X_minus[static_cast<std::size_t>(i)] - x_star;
    return d;
  }
  extend_to(x_star);
  auto it = std::lower_bound(canon_.begin(), canon_.end(), x_star,
                             [](const Segment& s, double x) { return s.x1 < x; });
  if (it == canon_.end()) throw Error(ErrorKind::SolverFailure, "x* not covered by the continuation path");
  return it->da - (x_star - it->xa) * it->q;
}

PositionSolution PositionPath::make_solution(double x_star, const Eigen::VectorXd& d0, const char* method,
                                             int iters) const {
  const RegularizedSign sg(opts_.epsilon);
  Eigen::VectorXd d = d0;
  double res = displacement_residual(phi_, y_, x_star, d, sg);
  // Newton polish inside the current sign pattern (C is affine there).
  for (int it = 0; it < 3 && res > 0.0; ++it) {
    const auto pat = regions(d, opts_.epsilon);
    const PatternSystem sys(phi_, y_, pat, opts_.epsilon);
    if (!sys.ok()) break;
    const auto n = d.size();
    Eigen::VectorXd s(n);
    for (Eigen::Index j = 0; j < n; ++j) s(j) = sg(d(j));
    Eigen::VectorXd r(n);
    Eigen::VectorXd cd = d - 0.5 * (phi_ * s);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = (y_[static_cast<std::size_t>(i)] - x_star) - cd(i);
    Eigen::VectorXd cand = d + sys.solve(r);
    if (regions(cand, opts_.epsilon) != pat) break;
    const double rc = displacement_residual(phi_, y_, x_star, cand, sg);
    if (!(rc < res)) break;
    d = cand;
    res = rc;
  }
  PositionSolution sol;
  sol.x_star = x_star;
  sol.d.assign(d.data(), d.data() + d.size());
  sol.X.resize(sol.d.size());
  for (std::size_t i = 0; i < sol.d.size(); ++i) sol.X[i] = x_star + sol.d[i];
  sol.pattern = regions(d, opts_.epsilon);
  sol.residual = displacement_residual(phi_, y_, x_star, d, sg);
  sol.iterations = iters;
  sol.method = method;
  return sol;
}

PositionSolution PositionPath::at(double x_star) {
  if (chi_.empty()) {
    PositionSolution s;
    s.x_star = x_star;
    s.method = "closed_form_left";
    return s;
  }
  const auto d = displacements(x_star);
  const char* method = x_star <= x_start_ ? "closed_form_left" : "continuation";
  return make_solution(x_star, d, method, static_cast<int>(events_));
}

// ---------------------------------------------------------------------------

PositionSolution solve_active_set(const std::vector<double>& chi, double x_star, const std::vector<double>& y,
                                  const std::vector<double>& d_guess, const ExpandOptions& opts) {
  const std::size_t n = chi.size();
  if (y.size() != n || d_guess.size() != n) throw Error(ErrorKind::LengthMismatch, "lengths must match");
  const auto phi = phi_matrix(chi);
  const RegularizedSign sg(opts.epsilon);
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(d_guess.data(), ni);
  auto finish = [&](const Eigen::VectorXd& dd, const char* method, int it) {
    PositionSolution s;
    s.x_star = x_star;
    s.d.assign(dd.data(), dd.data() + dd.size());
    s.X.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.X[i] = x_star + s.d[i];
    s.pattern = regions(dd, opts.epsilon);
    s.residual = displacement_residual(phi, y, x_star, dd, sg);
    s.iterations = it;
    s.method = method;
    return s;
  };

  double best = displacement_residual(phi, y, x_star, d, sg);
  Eigen::VectorXd best_d = d;
  if (best <= opts.tolerance) return finish(d, "active_set", 0);

  auto pat = regions(d, opts.epsilon);
  std::set<std::vector<SignRegion>> seen;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (!seen.insert(pat).second) break;  // cycle
    const PatternSystem sys(phi, y, pat, opts.epsilon);
    if (!sys.ok()) break;
    Eigen::VectorXd cand = sys.solve(sys.c - x_star * Eigen::VectorXd::Ones(ni));
    const double res = displacement_residual(phi, y, x_star, cand, sg);
    if (res < best) {
      best = res;
      best_d = cand;
    }
    const auto next = regions(cand, opts.epsilon);
    if (next == pat && res <= opts.tolerance) return finish(cand, "active_set", it + 1);
    if (next == pat) break;
    pat = next;
  }

  // Damped fixed point d <- (1-t) d + t (y - x* + 1/2 Phi sgn_eps(d)), t halved on residual increase.
  d = best_d;
  double theta = 0.5, res = best;
  for (int k = 0; it < opts.max_iterations; ++it, ++k) {
    Eigen::VectorXd s(ni);
    for (Eigen::Index j = 0; j < ni; ++j) s(j) = sg(d(j));
    Eigen::VectorXd target = 0.5 * (phi * s);
    for (Eigen::Index i = 0; i < ni; ++i) target(i) += y[static_cast<std::size_t>(i)] - x_star;
    Eigen::VectorXd cand = (1.0 - theta) * d + theta * target;
    const double rc = displacement_residual(phi, y, x_star, cand, sg);
    if (rc > res) {
      theta *= 0.5;
      if (theta < 1e-14) break;
      continue;
    }
    d = cand;
    res = rc;
    if (res <= opts.tolerance) return finish(d, "fixed_point", it + 1);
  }
  if (res < best) {
    best = res;
    best_d = d;
  }
  throw Error(ErrorKind::SolverFailure, "no solution found at x* = " + std::to_string(x_star) +
                                            "; best residual " + std::to_string(best));
}

PositionSolution expand(const std::vector<double>& chi, double x_star, const std::vector<double>& y,
                        const ExpandOptions& opts) {
  if (chi.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "chi and y must have equal length");
  const std::size_t n = chi.size();
  PositionSolution sol;
  sol.x_star = x_star;
  if (n == 0) {
    sol.method = "closed_form_left";
    return sol;
  }
  const SolitonConfig cfg(chi, y);
  const auto core = extremal_and_core(cfg);
  const RegularizedSign sg(opts.epsilon);
  auto closed = [&](const std::vector<double>& X, const char* method) {
    sol.X = X;
    sol.d.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.d[i] = X[i] - x_star;
    sol.pattern.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.pattern[i] = region_of(sol.d[i], opts.epsilon);
    const auto back = contract(chi, x_star, X, opts.epsilon);
    sol.residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) sol.residual = std::max(sol.residual, std::abs(back[i] - y[i]));
    sol.iterations = 0;
    sol.method = method;
    return sol;
  };
  if (x_star <= core.x_minus - opts.epsilon) return closed(core.X_minus, "closed_form_left");
  if (x_star >= core.x_plus + opts.epsilon) return closed(core.X_plus, "closed_form_right");

  PositionPath path(chi, y, opts);
  std::vector<double> warm(n);
  try {
    auto s = path.at(x_star);
    if (s.residual <= opts.tolerance) return s;
    warm = s.d;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SolverFailure) throw;
    const auto& segs = path.segments();
    if (!segs.empty()) {
      const auto& s = segs.back();
      Eigen::VectorXd d = s.da - (std::min(x_star, s.x1) - s.xa) * s.q;
      warm.assign(d.data(), d.data() + d.size());
    } else {
      for (std::size_t i = 0; i < n; ++i) warm[i] = core.X_minus[i] - x_star;
    }
  }
  return solve_active_set(chi, x_star, y, warm, opts);
}

PositionSolution expand(const SolitonConfig& config, double x_star, const ExpandOptions& opts) {
  return expand(config.chi(), x_star, config.y(), opts);
}

}  // namespace soligas
