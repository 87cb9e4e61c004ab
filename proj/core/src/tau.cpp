#include "soligas/tau.hpp"

#include <quadmath.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "soligas/error.hpp"
#include "soligas/parallel.hpp"
#include "soligas/positions.hpp"

namespace soligas {

SubsetMask full_mask(std::size_t n) {
  if (n > 63) throw Error(ErrorKind::CapExceeded, "subset masks hold at most 63 solitons");
  return n == 0 ? 0 : ((SubsetMask{1} << n) - 1);
}

SubsetMask mask_of(const std::vector<int>& idx) {
  SubsetMask m = 0;
  for (int i : idx) {
    if (i < 0 || i > 62) throw Error(ErrorKind::InvalidArgument, "subset index out of range");
    m |= SubsetMask{1} << i;
  }
  return m;
}

std::vector<int> indices_of(SubsetMask mask, std::size_t n) {
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i)
    if (mask >> i & 1u) out.push_back(static_cast<int>(i));
  return out;
}

std::string Representation::label() const {
  std::ostringstream os;
  switch (kind) {
    case RepresentationKind::Determinant: return "determinant";
    case RepresentationKind::InOut: os << "in_out(" << subset << ")"; return os.str();
    case RepresentationKind::Centred:
      os.precision(17);
      os << "centred(" << x_star << ")";
      return os.str();
  }
  return "unknown";
}

FieldJet jet_from_log_tau(const LogTauJet& lt, int order) {
  if (static_cast<int>(lt.derivs.size()) < order + 3)
    throw Error(ErrorKind::InvalidArgument, "log-tau jet too short for requested field order");
  FieldJet j;
  j.x = lt.x;
  j.order = order;
  j.values.resize(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) j.values[static_cast<std::size_t>(k)] = 2.0 * lt.derivs[static_cast<std::size_t>(k) + 2];
  j.log_tau = lt.derivs[0];
  j.representation = lt.representation;
  j.condition = lt.condition;
  j.extended_precision = lt.extended_precision;
  return j;
}

// ---------------------------------------------------------------------------
// Exponential-sum expansions

TauExpansion::TauExpansion(std::vector<ExpansionTerm> terms, Representation rep)
    : terms_(std::move(terms)), rep_(rep) {}

LogTauJet TauExpansion::evaluate(double x, int max_order) const {
  if (max_order < 0 || max_order > kMaxLogTauOrder)
    throw Error(ErrorKind::InvalidArgument, "log-tau derivative order must be in [0,6]");
  LogTauJet out;
  out.x = x;
  out.representation = rep_;
  out.derivs.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (terms_.empty()) return out;

  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) mx = std::max(mx, t.log_weight + t.rate * x);
  if (!std::isfinite(mx)) throw Error(ErrorKind::RepresentationFailure, "non-finite expansion exponent");

  // Terms below max - 745 underflow to zero and drop out.
  double z = 0.0, mean = 0.0;
  thread_local std::vector<double> w;
  w.resize(terms_.size());
  for (std::size_t r = 0; r < terms_.size(); ++r) {
    const double e = terms_[r].log_weight + terms_[r].rate * x - mx;
    w[r] = e < -745.0 ? 0.0 : std::exp(e);
    z += w[r];
  }
  for (std::size_t r = 0; r < terms_.size(); ++r) mean += w[r] * terms_[r].rate;
  mean /= z;
  out.derivs[0] = mx + std::log(z);
  if (max_order == 0) return out;

  // Central moments of the rate distribution, then cumulants.
  double m[kMaxLogTauOrder + 1] = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t r = 0; r < terms_.size(); ++r) {
    if (w[r] == 0.0) continue;
    const double c = terms_[r].rate - mean;
    double p = c;
    for (int k = 2; k <= max_order; ++k) {
      p *= c;
      m[k] += w[r] * p;
    }
  }
  for (int k = 2; k <= max_order; ++k) m[k] /= z;

  static const double binom[7][7] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1},
                                     {1, 5, 10, 10, 5, 1}, {1, 6, 15, 20, 15, 6, 1}};
  double kap[kMaxLogTauOrder + 1] = {0, 0, 0, 0, 0, 0, 0};
  for (int k = 2; k <= max_order; ++k) {
    double v = m[k];
    for (int j = 2; j < k; ++j) v -= binom[k - 1][j - 1] * kap[j] * m[k - j];
    kap[k] = v;
  }
  out.derivs[1] = mean;
  for (int k = 2; k <= max_order; ++k) out.derivs[static_cast<std::size_t>(k)] = kap[k];
  return out;
}

namespace {

// Builds sum_r exp(sum_{i in r} single_i + 2 sum_{i<j in r} sign_i sign_j L_ij + x sum_{i in r} rate_i)
// over all subsets of `kept` (indices into the full arrays).
std::vector<ExpansionTerm> build_terms(const std::vector<int>& kept, const std::vector<double>& single,
                                       const std::vector<double>& rate, const std::vector<double>& sign,
                                       const Eigen::MatrixXd& log_abs_s) {
  const std::size_t k = kept.size();
  const std::size_t count = std::size_t{1} << k;
  std::vector<ExpansionTerm> terms(count);
  terms[0] = {0, 0.0, 0.0};
  for (std::size_t mask = 1; mask < count; ++mask) {
    const int low = std::countr_zero(mask);
    const std::size_t rest = mask & (mask - 1);
    const int i = kept[static_cast<std::size_t>(low)];
    double lw = terms[rest].log_weight + single[static_cast<std::size_t>(i)];
    double pair = 0.0;
    for (std::size_t bits = rest; bits; bits &= bits - 1) {
      const int j = kept[static_cast<std::size_t>(std::countr_zero(bits))];
      pair += sign[static_cast<std::size_t>(j)] * log_abs_s(i, j);
    }
    lw += 2.0 * sign[static_cast<std::size_t>(i)] * pair;
    SubsetMask full = 0;
    for (std::size_t bits = mask; bits; bits &= bits - 1)
      full |= SubsetMask{1} << kept[static_cast<std::size_t>(std::countr_zero(bits))];
    terms[mask] = {full, lw, terms[rest].rate + rate[static_cast<std::size_t>(i)]};
  }
  return terms;
}

Eigen::MatrixXd log_abs_s_matrix(const ScatteringTable& t) {
  const auto n = t.s_ratio.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) l(i, j) = std::log(std::abs(t.s_ratio(i, j)));
  return l;
}

}  // namespace

std::vector<ExpansionTerm> in_out_terms(const SolitonConfig& config, SubsetMask s, std::size_t cap) {
  const std::size_t n = config.size();
  if (n > cap || n > 62)
    throw Error(ErrorKind::CapExceeded, "in-out expansion needs 2^n terms; n = " + std::to_string(n) +
                                            " exceeds cap " + std::to_string(cap));
  if (n < 64 && (s & ~full_mask(n)) != 0)
    throw Error(ErrorKind::InvalidArgument, "subset contains indices beyond n");
  const auto t = scattering_tables(config.chi());
  std::vector<double> sign(n), single(n), rate(n);
  for (std::size_t i = 0; i < n; ++i) sign[i] = (s >> i & 1u) ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double xs = config.y(i);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) xs += 0.5 * sign[j] * t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    rate[i] = 2.0 * config.chi(i) * sign[i];
    single[i] = -rate[i] * xs;
  }
  std::vector<int> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);
  return build_terms(all, single, rate, sign, log_abs_s_matrix(t));
}

TauExpansion make_in_out(const SolitonConfig& config, SubsetMask s, std::size_t cap) {
  Representation rep{RepresentationKind::InOut, s, 0.0};
  return TauExpansion(in_out_terms(config, s, cap), rep);
}

LogTauJet tau_expansion(const SolitonConfig& config, double x, SubsetMask s, int max_order, std::size_t cap) {
  return make_in_out(config, s, cap).evaluate(x, max_order);
}

// ---------------------------------------------------------------------------
// Centred form

std::vector<ExpansionTerm> centred_terms(const SolitonConfig& config, double x_star, const std::vector<double>& d,
                                         const std::vector<int>& kept, double epsilon,
                                         std::vector<double>* e_out) {
  const std::size_t n = config.size();
  if (d.size() != n) throw Error(ErrorKind::LengthMismatch, "displacement vector must have length n");
  const auto t = scattering_tables(config.chi());
  const RegularizedSign sg(epsilon);
  std::vector<double> sign(n), e(n, 0.0), single(n), rate(n);
  for (std::size_t i = 0; i < n; ++i) sign[i] = sgn(d[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        e[i] += 0.5 * (sign[j] - sg(d[j])) * t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const double c2 = 2.0 * config.chi(i);
    rate[i] = c2 * sign[i];
    single[i] = -c2 * (std::abs(d[i]) + sign[i] * (x_star + e[i]));
  }
  if (e_out) *e_out = e;
  return build_terms(kept, single, rate, sign, log_abs_s_matrix(t));
}

CentredResult tau_centred(const SolitonConfig& config, double x, double x_star, const std::vector<double>& d,
                          const CentredOptions& opts) {
  const std::size_t n = config.size();
  if (d.size() != n) throw Error(ErrorKind::LengthMismatch, "displacement vector must have length n");
  const auto t = scattering_tables(config.chi());
  const RegularizedSign sg(opts.epsilon);

  CentredResult res;
  for (std::size_t i = 0; i < n; ++i) {
    double c = d[i];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) c -= 0.5 * sg(d[j]) * t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    res.residual = std::max(res.residual, std::abs(c - (config.y(i) - x_star)));
  }
  if (!(res.residual <= opts.residual_tolerance))
    throw Error(ErrorKind::InconsistentDisplacements,
                "||C(d) - (y - x*)||_inf = " + std::to_string(res.residual));

  std::optional<double> cutoff = opts.cutoff;
  if (!cutoff && n > opts.cap) {
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(d[i]);
    std::nth_element(a.begin(), a.begin() + static_cast<long>(opts.cap) - 1, a.end());
    cutoff = 2.0 * a[opts.cap - 1];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!cutoff || std::abs(d[i]) <= *cutoff / 2.0) res.kept.push_back(static_cast<int>(i));
  if (res.kept.size() > opts.cap)
    throw Error(ErrorKind::CapExceeded, std::to_string(res.kept.size()) + " solitons kept, cap " +
                                            std::to_string(opts.cap));

  auto terms = centred_terms(config, x_star, d, res.kept, opts.epsilon, &res.e);
  TauExpansion ex(std::move(terms), Representation{RepresentationKind::Centred, 0, x_star});
  res.jet = ex.evaluate(x, opts.max_order);

  if (cutoff) {
    double chi_min = std::numeric_limits<double>::infinity();
    for (double c : config.chi()) chi_min = std::min(chi_min, c);
    res.discarded_envelope = std::exp(-chi_min * *cutoff);
    const auto dropped = complement(n, res.kept);
    for (int i : dropped) {
      const auto k = static_cast<std::size_t>(i);
      res.discarded_estimate +=
          std::exp(-2.0 * config.chi(k) * (std::abs(d[k]) - std::abs(x - x_star) - std::abs(res.e[k])));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Determinant path: log det(Psi^2 + omega) with symmetric row/column scaling.

namespace {

inline double f_exp(double v) { return std::exp(v); }
inline double f_log(double v) { return std::log(v); }
inline double f_sqrt(double v) { return std::sqrt(v); }
inline double f_abs(double v) { return std::abs(v); }
inline __float128 f_exp(__float128 v) { return expq(v); }
inline __float128 f_log(__float128 v) { return logq(v); }
inline __float128 f_sqrt(__float128 v) { return sqrtq(v); }
inline __float128 f_abs(__float128 v) { return fabsq(v); }

template <class T>
struct Mat {
  std::size_t n = 0;
  std::vector<T> a;
  explicit Mat(std::size_t n_ = 0) : n(n_), a(n_ * n_, T(0)) {}
  T& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

template <class T>
Mat<T> matmul(const Mat<T>& x, const Mat<T>& y) {
  const std::size_t n = x.n;
  Mat<T> z(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const T xik = x(i, k);
      if (xik == T(0)) continue;
      for (std::size_t j = 0; j < n; ++j) z(i, j) += xik * y(k, j);
    }
  return z;
}

template <class T>
T trace_of_product(const Mat<T>& x, const Mat<T>& y) {
  T s(0);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < x.n; ++k) s += x(i, k) * y(k, i);
  return s;
}

template <class T>
T norm1(const Mat<T>& m) {
  T best(0);
  for (std::size_t j = 0; j < m.n; ++j) {
    T s(0);
    for (std::size_t i = 0; i < m.n; ++i) s += f_abs(m(i, j));
    if (s > best) best = s;
  }
  return best;
}

struct DetData {
  std::vector<double> chi, a;
};

// Row/column scaling: sigma_i = 1 scales by Psi_i^{-1}; diagonal becomes 1 + Psi^-2 or Psi^2 + 1.
template <class T>
struct ScaledSystem {
  Mat<T> m;
  std::vector<T> chi, psi2, e;
  std::vector<int> sigma;
  T affine_x;  // sum_{sigma=1} 2 chi_i (x - a_i)
};

template <class T>
ScaledSystem<T> build_scaled(const DetData& dd, double x, const std::vector<int>& sigma) {
  const std::size_t n = dd.chi.size();
  ScaledSystem<T> s;
  s.m = Mat<T>(n);
  s.chi.resize(n);
  s.psi2.resize(n);
  s.e.resize(n);
  s.sigma = sigma;
  s.affine_x = T(0);
  std::vector<T> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.chi[i] = T(dd.chi[i]);
    const T arg = s.chi[i] * (T(x) - T(dd.a[i]));
    if (sigma[i]) {
      s.psi2[i] = T(0);
      s.e[i] = f_exp(-arg);
      g[i] = T(1);
      s.affine_x += T(2) * arg;
    } else {
      s.psi2[i] = f_exp(T(2) * arg);
      s.e[i] = T(1);
      g[i] = s.psi2[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const T om = (i == j) ? T(1) : T(2) * f_sqrt(s.chi[i] * s.chi[j]) / (s.chi[i] + s.chi[j]);
      s.m(i, j) = om * s.e[i] * s.e[j] + (i == j ? g[i] : T(0));
    }
  return s;
}

template <class T>
struct LuResult {
  T log_det;
  Mat<T> inverse;
  bool ok;
};

template <class T>
LuResult<T> lu_inverse(const Mat<T>& m) {
  const std::size_t n = m.n;
  Mat<T> lu = m;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  T log_det(0);
  int sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    T best = f_abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (f_abs(lu(i, k)) > best) {
        best = f_abs(lu(i, k));
        p = i;
      }
    if (best == T(0)) return {T(0), Mat<T>(n), false};
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
      std::swap(perm[k], perm[p]);
      sign = -sign;
    }
    const T piv = lu(k, k);
    if (piv < T(0)) sign = -sign;
    log_det += f_log(f_abs(piv));
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = lu(i, k) / piv;
      lu(i, k) = f;
      if (f == T(0)) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
    }
  }
  Mat<T> inv(n);
  std::vector<T> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = (perm[i] == c) ? T(1) : T(0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) col[i] -= lu(i, j) * col[j];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j) col[ii] -= lu(ii, j) * col[j];
      col[ii] /= lu(ii, ii);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, c) = col[i];
  }
  return {log_det, std::move(inv), sign > 0};
}

// k-th x-derivative of the scaled matrix.
template <class T>
Mat<T> scaled_derivative(const ScaledSystem<T>& s, int k) {
  const std::size_t n = s.m.n;
  Mat<T> d(n);
  std::vector<T> rho(n);
  for (std::size_t i = 0; i < n; ++i) rho[i] = s.sigma[i] ? -s.chi[i] : T(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (s.sigma[i] == 0 && s.sigma[j] == 0 && i != j) continue;  // constant entries
      const T om = (i == j) ? T(1) : T(2) * f_sqrt(s.chi[i] * s.chi[j]) / (s.chi[i] + s.chi[j]);
      T r = rho[i] + rho[j], p(1);
      for (int q = 0; q < k; ++q) p *= r;
      d(i, j) = om * p * s.e[i] * s.e[j];
    }
  for (std::size_t i = 0; i < n; ++i)
    if (!s.sigma[i]) {
      T p(1);
      for (int q = 0; q < k; ++q) p *= T(2) * s.chi[i];
      d(i, i) += p * s.psi2[i];
    }
  return d;
}

template <class T>
struct DetJet {
  std::vector<T> derivs;  // derivatives of log det of the scaled matrix
  T affine_x;
  T condition;
  bool ok;
};

// Derivatives of log det M(x+h) from the truncated series tr log(I + A (M(x+h) - M(x))).
template <class T>
DetJet<T> det_jet(const DetData& dd, double x, const std::vector<int>& sigma, int max_order) {
  auto s = build_scaled<T>(dd, x, sigma);
  const std::size_t n = s.m.n;
  DetJet<T> out;
  out.derivs.assign(static_cast<std::size_t>(max_order) + 1, T(0));
  out.affine_x = s.affine_x;
  auto lu = lu_inverse(s.m);
  out.ok = lu.ok && lu.log_det == lu.log_det;
  out.condition = norm1(s.m) * norm1(lu.inverse);
  out.derivs[0] = lu.log_det;
  if (!out.ok || max_order == 0) return out;

  // B_k = A M^(k) / k!
  std::vector<Mat<T>> b(static_cast<std::size_t>(max_order) + 1);
  T fact(1);
  for (int k = 1; k <= max_order; ++k) {
    fact *= T(k);
    b[static_cast<std::size_t>(k)] = matmul(lu.inverse, scaled_derivative(s, k));
    for (auto& v : b[static_cast<std::size_t>(k)].a) v /= fact;
  }
  // power[p][c]: coefficient of h^c in B(h)^p
  std::vector<T> coef(static_cast<std::size_t>(max_order) + 1, T(0));
  std::vector<Mat<T>> power(static_cast<std::size_t>(max_order) + 1, Mat<T>(n));
  for (int c = 1; c <= max_order; ++c) {
    power[static_cast<std::size_t>(c)] = b[static_cast<std::size_t>(c)];
    T tr(0);
    for (std::size_t i = 0; i < n; ++i) tr += b[static_cast<std::size_t>(c)](i, i);
    coef[static_cast<std::size_t>(c)] += tr;
  }
  for (int p = 2; p <= max_order; ++p) {
    std::vector<Mat<T>> next(static_cast<std::size_t>(max_order) + 1, Mat<T>(n));
    const T w = ((p % 2) ? T(1) : T(-1)) / T(p);
    for (int c = p; c <= max_order; ++c) {
      if (p == max_order || c == max_order) {
        // only the trace is needed
        T tr(0);
        for (int a = p - 1; a <= c - 1; ++a)
          tr += trace_of_product(power[static_cast<std::size_t>(a)], b[static_cast<std::size_t>(c - a)]);
        coef[static_cast<std::size_t>(c)] += w * tr;
        continue;
      }
      Mat<T> acc(n);
      for (int a = p - 1; a <= c - 1; ++a) {
        auto prod = matmul(power[static_cast<std::size_t>(a)], b[static_cast<std::size_t>(c - a)]);
        for (std::size_t q = 0; q < acc.a.size(); ++q) acc.a[q] += prod.a[q];
      }
      T tr(0);
      for (std::size_t i = 0; i < n; ++i) tr += acc(i, i);
      coef[static_cast<std::size_t>(c)] += w * tr;
      next[static_cast<std::size_t>(c)] = std::move(acc);
    }
    power = std::move(next);
  }
  fact = T(1);
  for (int k = 1; k <= max_order; ++k) {
    fact *= T(k);
    out.derivs[static_cast<std::size_t>(k)] = fact * coef[static_cast<std::size_t>(k)];
  }
  return out;
}

template <class T>
LogTauJet to_log_tau(const DetData& dd, double x, const DetJet<T>& dj, const std::vector<int>& sigma,
                     int max_order) {
  LogTauJet out;
  out.x = x;
  out.representation = Representation{RepresentationKind::Determinant, 0, 0.0};
  out.derivs.resize(static_cast<std::size_t>(max_order) + 1);
  double slope = 0.0, offset = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i)
    if (sigma[i]) {
      slope += 2.0 * dd.chi[i];
      offset -= 2.0 * dd.chi[i] * dd.a[i];
    }
  out.derivs[0] = static_cast<double>(dj.derivs[0] + dj.affine_x);
  for (int k = 1; k <= max_order; ++k) out.derivs[static_cast<std::size_t>(k)] = static_cast<double>(dj.derivs[static_cast<std::size_t>(k)]);
  if (max_order >= 1) out.derivs[1] += slope;
  out.affine_slope = slope;
  out.affine_offset = offset;
  out.condition = static_cast<double>(dj.condition);
  return out;
}

std::vector<int> choose_sigma(const DetData& dd, double x, const std::optional<std::vector<double>>& pos) {
  const std::size_t n = dd.chi.size();
  std::vector<int> sigma(n);
  if (pos && pos->size() != n) throw Error(ErrorKind::LengthMismatch, "positions must have length n");
  for (std::size_t i = 0; i < n; ++i) sigma[i] = (x >= (pos ? (*pos)[i] : dd.a[i])) ? 1 : 0;
  return sigma;
}

LogTauJet analytic_jet(const DetData& dd, double x, const std::vector<int>& sigma, const DeterminantOptions& opts,
                       int order) {
  auto dj = det_jet<double>(dd, x, sigma, order);
  const bool need_ext = !dj.ok || !(dj.condition <= opts.extended_threshold);
  if (need_ext && opts.allow_extended) {
    auto qj = det_jet<__float128>(dd, x, sigma, order);
    if (!qj.ok)
      throw Error(ErrorKind::RepresentationFailure,
                  "scaled determinant is singular or non-finite; use the centred form");
    if (!(qj.condition <= opts.failure_threshold))
      throw Error(ErrorKind::RepresentationFailure, "scaled determinant is too ill-conditioned; use the centred form");
    auto out = to_log_tau(dd, x, qj, sigma, order);
    out.extended_precision = true;
    return out;
  }
  if (!dj.ok)
    throw Error(ErrorKind::RepresentationFailure, "scaled determinant is singular or non-finite; use the centred form");
  if (need_ext && !(dj.condition <= 1e3 * opts.extended_threshold))
    throw Error(ErrorKind::RepresentationFailure, "scaled determinant is too ill-conditioned; use the centred form");
  return to_log_tau(dd, x, dj, sigma, order);
}

}  // namespace

DeterminantEvaluator::DeterminantEvaluator(const SolitonConfig& config)
    : chi_(config.chi()), a_(naive_impact(config)) {}

LogTauJet DeterminantEvaluator::evaluate(double x, const DeterminantOptions& opts) const {
  if (opts.max_order < 0 || opts.max_order > kMaxLogTauOrder)
    throw Error(ErrorKind::InvalidArgument, "log-tau derivative order must be in [0,6]");
  const DetData dd{chi_, a_};
  if (chi_.empty()) {
    LogTauJet out;
    out.x = x;
    out.derivs.assign(static_cast<std::size_t>(opts.max_order) + 1, 0.0);
    return out;
  }
  const auto sigma = choose_sigma(dd, x, opts.positions);
  LogTauJet out;
  if (opts.method == DerivativeMethod::Analytic) {
    out = analytic_jet(dd, x, sigma, opts, opts.max_order);
  } else {
    if (opts.max_order > 4)
      throw Error(ErrorKind::Unsupported, "finite-difference derivatives are limited to order 4");
    // 5-point central stencils with two Richardson levels; the row scaling is frozen so the
    // affine part stays fixed across the stencil.
    double chi_max = 0.0;
    for (double c : chi_) chi_max = std::max(chi_max, c);
    const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0) / chi_max;
    auto logtau = [&](double xx) { return analytic_jet(dd, xx, sigma, opts, 0).derivs[0]; };
    out = analytic_jet(dd, x, sigma, opts, 0);
    out.derivs.resize(static_cast<std::size_t>(opts.max_order) + 1);
    auto stencil = [&](double h, int k) {
      const double f2 = logtau(x + 2 * h), f1 = logtau(x + h), f0 = out.derivs[0], m1 = logtau(x - h),
                   m2 = logtau(x - 2 * h);
      switch (k) {
        case 1: return (-f2 + 8 * f1 - 8 * m1 + m2) / (12 * h);
        case 2: return (-f2 + 16 * f1 - 30 * f0 + 16 * m1 - m2) / (12 * h * h);
        case 3: return (f2 - 2 * f1 + 2 * m1 - m2) / (2 * h * h * h);
        default: return (f2 - 4 * f1 + 6 * f0 - 4 * m1 + m2) / (h * h * h * h);
      }
    };
    for (int k = 1; k <= opts.max_order; ++k) {
      const int p = (k <= 2) ? 4 : 2;
      const double r = std::pow(2.0, p);
      const double d0 = stencil(h0, k), d1 = stencil(h0 / 2, k), d2 = stencil(h0 / 4, k);
      const double e1 = (r * d1 - d0) / (r - 1), e2 = (r * d2 - d1) / (r - 1);
      const double r2 = std::pow(2.0, p + 2);
      out.derivs[static_cast<std::size_t>(k)] = (r2 * e2 - e1) / (r2 - 1);
    }
  }
  for (double v : out.derivs)
    if (!std::isfinite(v))
      throw Error(ErrorKind::RepresentationFailure, "non-finite log-tau derivative; use the centred form");
  return out;
}

LogTauJet tau_determinant(const SolitonConfig& config, double x, const DeterminantOptions& opts) {
  return DeterminantEvaluator(config).evaluate(x, opts);
}

// ---------------------------------------------------------------------------
// Field assembly

FieldEvaluator::FieldEvaluator(const SolitonConfig& config, const FieldOptions& opts)
    : n_(config.size()), opts_(opts) {
  switch (opts.method) {
    case FieldMethod::Auto: use_expansion_ = n_ <= opts.cap; break;
    case FieldMethod::Expansion: use_expansion_ = true; break;
    case FieldMethod::Determinant: use_expansion_ = false; break;
  }
  if (use_expansion_) {
    expansion_ = make_in_out(config, full_mask(n_), opts.cap);
  } else {
    det_.emplace(config);
    if (opts.method == FieldMethod::Auto && opts.centred_fallback) config_ = config;
  }
}

FieldJet FieldEvaluator::operator()(double x, int order) const {
  if (order < 0 || order > kMaxFieldOrder) throw Error(ErrorKind::InvalidArgument, "field order must be in [0,4]");
  if (use_expansion_) return jet_from_log_tau(expansion_.evaluate(x, order + 2), order);
  DeterminantOptions d = opts_.determinant;
  d.max_order = order + 2;
  if (config_.empty()) return jet_from_log_tau(det_->evaluate(x, d), order);
  try {
    return jet_from_log_tau(det_->evaluate(x, d), order);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RepresentationFailure) throw;
  }
  const auto sol = expand(config_, x);
  if (!d.positions) {
    d.positions = sol.X;
    try {
      return jet_from_log_tau(det_->evaluate(x, d), order);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RepresentationFailure) throw;
    }
  }
  CentredOptions co;
  co.max_order = order + 2;
  double estimate = 0.0;
  for (co.cap = opts_.cap;; ++co.cap) {
    const auto r = tau_centred(config_, x, x, sol.d, co);
    if (r.discarded_estimate <= opts_.fallback_tolerance) return jet_from_log_tau(r.jet, order);
    estimate = r.discarded_estimate;
    if (co.cap >= std::min(n_, opts_.fallback_cap)) break;
  }
  throw Error(ErrorKind::RepresentationFailure, "determinant failed and the centred form at x* = x discards " +
                                                    std::to_string(estimate) + "; raise the fallback cap");
}

FieldJet field(const SolitonConfig& config, double x, int order, const FieldOptions& opts) {
  return FieldEvaluator(config, opts)(x, order);
}

std::vector<FieldJet> field_grid(const SolitonConfig& config, const std::vector<double>& xs, int order,
                                 const FieldOptions& opts) {
  const FieldEvaluator ev(config, opts);
  std::vector<FieldJet> out(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { out[i] = ev(xs[i], order); });
  return out;
}

double derivative_bound(const SolitonConfig& config, int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "derivative order must be non-negative");
  const int m = n + 2;
  // Stirling numbers of the second kind S(m, k).
  std::vector<std::vector<double>> st(static_cast<std::size_t>(m) + 1, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
  st[0][0] = 1.0;
  for (int a = 1; a <= m; ++a)
    for (int k = 1; k <= a; ++k)
      st[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] =
          k * st[static_cast<std::size_t>(a) - 1][static_cast<std::size_t>(k)] +
          st[static_cast<std::size_t>(a) - 1][static_cast<std::size_t>(k) - 1];
  double sum = 0.0, fact = 1.0;
  for (int k = 1; k <= m; ++k) {
    if (k > 1) fact *= (k - 1);
    sum += fact * st[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
  }
  double s = 0.0;
  for (double c : config.chi()) s += c;
  return 2.0 * sum * std::pow(2.0 * s, m);
}

}  // namespace soligas
