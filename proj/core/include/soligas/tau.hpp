#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "soligas/model.hpp"

namespace soligas {

inline constexpr std::size_t kExactCap = 14;
inline constexpr int kMaxLogTauOrder = 6;
inline constexpr int kMaxFieldOrder = 4;

using SubsetMask = std::uint64_t;

SubsetMask full_mask(std::size_t n);
SubsetMask mask_of(const std::vector<int>& idx);
std::vector<int> indices_of(SubsetMask mask, std::size_t n);

enum class RepresentationKind { Determinant, InOut, Centred };

struct Representation {
  RepresentationKind kind = RepresentationKind::Determinant;
  SubsetMask subset = 0;  // in-out only
  double x_star = 0.0;    // centred only
  std::string label() const;
};

// log tau and its x-derivatives; derivs[k] = d^k/dx^k log tau, derivs[0] = log tau.
struct LogTauJet {
  double x = 0.0;
  std::vector<double> derivs;
  Representation representation;
  // Determinant path diagnostics.
  double condition = 1.0;
  bool extended_precision = false;
  // Affine part A x + B removed by row scaling (log tau = log det + A x + B).
  double affine_slope = 0.0;
  double affine_offset = 0.0;

  double log_tau() const { return derivs.at(0); }
};

struct FieldJet {
  double x = 0.0;
  int order = 0;
  std::vector<double> values;  // u, u_x, ..., d^order u
  double log_tau = 0.0;
  Representation representation;
  double condition = 1.0;
  bool extended_precision = false;

  double u() const { return values.at(0); }
};

FieldJet jet_from_log_tau(const LogTauJet& lt, int order);

struct ExpansionTerm {
  SubsetMask subset = 0;
  double log_weight = 0.0;
  double rate = 0.0;
};

// Log-sum-exp evaluator over a fixed list of exponential terms sum_r exp(lw_r + rate_r x).
class TauExpansion {
 public:
  TauExpansion() = default;
  TauExpansion(std::vector<ExpansionTerm> terms, Representation rep);

  // Derivatives of log tau up to `max_order` (exact cumulants of the rate distribution).
  LogTauJet evaluate(double x, int max_order) const;
  const std::vector<ExpansionTerm>& terms() const noexcept { return terms_; }
  const Representation& representation() const noexcept { return rep_; }

 private:
  std::vector<ExpansionTerm> terms_;
  Representation rep_;
};

// In-out expansion with subset s (bit i set means soliton i sent to +infinity side).
std::vector<ExpansionTerm> in_out_terms(const SolitonConfig& config, SubsetMask s,
                                        std::size_t cap = kExactCap);
TauExpansion make_in_out(const SolitonConfig& config, SubsetMask s, std::size_t cap = kExactCap);
LogTauJet tau_expansion(const SolitonConfig& config, double x, SubsetMask s, int max_order = 2,
                        std::size_t cap = kExactCap);

enum class DerivativeMethod { Analytic, FiniteDifference };

struct DeterminantOptions {
  int max_order = 2;  // derivatives of log tau
  DerivativeMethod method = DerivativeMethod::Analytic;
  // Magnifying-glass positions at x* = x; when present they choose the row scaling.
  std::optional<std::vector<double>> positions;
  // Above this 1-norm condition number the factorisation is redone in quad precision.
  double extended_threshold = 1e5;
  bool allow_extended = true;
  // Above this the result is rejected: quad precision leaves fewer than ~8 digits.
  double failure_threshold = 1e26;
};

LogTauJet tau_determinant(const SolitonConfig& config, double x, const DeterminantOptions& opts = {});

class DeterminantEvaluator {
 public:
  explicit DeterminantEvaluator(const SolitonConfig& config);
  LogTauJet evaluate(double x, const DeterminantOptions& opts) const;

 private:
  std::vector<double> chi_;
  std::vector<double> a_;
};

struct CentredOptions {
  int max_order = 2;
  double epsilon = kDefaultEpsilon;
  std::size_t cap = kExactCap;
  std::optional<double> cutoff;  // L: drop solitons with |d_i| > L/2
  double residual_tolerance = 1e-8;
};

struct CentredResult {
  LogTauJet jet;
  std::vector<int> kept;
  std::vector<double> e;              // e_i
  double discarded_estimate = 0.0;    // sum_i exp(-2 chi_i (|d_i| - |x - x*| - |e_i|)) over dropped
  double discarded_envelope = 0.0;    // exp(-chi_min L)
  double residual = 0.0;              // ||C(d) - (y - x*)||_inf
};

std::vector<ExpansionTerm> centred_terms(const SolitonConfig& config, double x_star,
                                         const std::vector<double>& d, const std::vector<int>& kept,
                                         double epsilon, std::vector<double>* e_out = nullptr);
CentredResult tau_centred(const SolitonConfig& config, double x, double x_star,
                          const std::vector<double>& d, const CentredOptions& opts = {});

enum class FieldMethod { Auto, Expansion, Determinant };

struct FieldOptions {
  FieldMethod method = FieldMethod::Auto;
  std::size_t cap = kExactCap;
  DeterminantOptions determinant;
  // Auto only: when the determinant fails, retry with row scaling from the positions at x* = x,
  // then fall back to the centred form truncated to the solitons nearest x. The truncation grows
  // from `cap` to `fallback_cap` until the discarded estimate is below `fallback_tolerance`.
  bool centred_fallback = true;
  std::size_t fallback_cap = 20;
  double fallback_tolerance = 1e-10;
};

// Evaluates u and its derivatives at many points with a representation chosen once.
class FieldEvaluator {
 public:
  FieldEvaluator() = default;
  FieldEvaluator(const SolitonConfig& config, const FieldOptions& opts = {});
  FieldJet operator()(double x, int order) const;
  bool uses_expansion() const noexcept { return use_expansion_; }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_ = 0;
  bool use_expansion_ = true;
  TauExpansion expansion_;
  std::optional<DeterminantEvaluator> det_;
  FieldOptions opts_;
  SolitonConfig config_;  // kept for the fallback
};

FieldJet field(const SolitonConfig& config, double x, int order, const FieldOptions& opts = {});
std::vector<FieldJet> field_grid(const SolitonConfig& config, const std::vector<double>& xs, int order,
                                 const FieldOptions& opts = {});

// Right side of the a-priori derivative bound |d^n u| <= 2 sum_k (k-1)! S(n+2,k) (2 sum chi)^(n+2).
double derivative_bound(const SolitonConfig& config, int n);

}  // namespace soligas
