#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "carleson/measure.hpp"
#include "carleson/space.hpp"
#include "carleson/summation.hpp"

namespace carleson {

enum class Verdict { holds, fails, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

/// How the behaviour beyond the truncation was settled.
enum class TailMode { exhausted, declared_monotone, stabilized, unresolved };

inline const char* to_string(TailMode t) {
  switch (t) {
    case TailMode::exhausted: return "support_exhausted";
    case TailMode::declared_monotone: return "declared_monotone";
    case TailMode::stabilized: return "stabilized_window";
    case TailMode::unresolved: return "unresolved";
  }
  return "unresolved";
}

struct CriteriaOptions {
  Index window = 0;             ///< trailing window length; 0 selects ceil(N/4)
  double decay_margin = 1e-3;   ///< decay needs successive ratios below 1 - margin
  double liminf_floor = 1e-9;   ///< window minimum at or above this means "does not vanish"
  double bounded_slack = 1e-9;  ///< relative slack for "nonincreasing" on the window
  bool tail_monotone = false;   ///< caller asserts the quantities do not grow past the window
};

/// Per-index certificate quantities (0-based index n stands for the n+1-th
/// annulus):
///   A_n     = v_n * int_{Omega_n} d mu / |z - gamma_n|^2
///   tau_sq  = int_{Omega_n} d mu / |z|^2
///   mass    = mu(Omega_n)
///   Vhat_n  = sum_{m<=n} v_m
///   P_n     = sum_{m>n} v_m / |gamma_m|^2 over the truncation
///   P_upper = P_n plus a geometric bound for m > N (+inf when unavailable)
///   D_n     = Vhat_n * sum_{m>n} tau_sq_m + P_n * sum_{m<=n} mass_m
template <typename Real>
struct QuantitySequences {
  RealVector<Real> A;
  RealVector<Real> tau_sq;
  RealVector<Real> mass;
  RealVector<Real> Vhat;
  RealVector<Real> P;
  RealVector<Real> P_upper;
  RealVector<Real> D;
  Real tail_ratio_P;  ///< windowed ratio used for P_upper; NaN when N < 2
};

template <typename Real>
struct Certificate {
  Verdict verdict = Verdict::inconclusive;
  Real sup_A = Real(0);
  Real sup_D = Real(0);
  Index witness_A = 0;
  Index witness_D = 0;
  Real c_star = Real(0);
  Real window_max_A = Real(0);
  Real window_max_D = Real(0);
  Real window_min_A = Real(0);
  Real window_min_D = Real(0);
  Real decay_ratio_A = std::numeric_limits<Real>::quiet_NaN();
  Real decay_ratio_D = std::numeric_limits<Real>::quiet_NaN();
  Index window_begin = 0;  ///< first index of the A window (the D window ends one earlier)
  Index window_end = 0;    ///< last index of the A window, inclusive
  TailMode tail = TailMode::unresolved;
  std::vector<std::string> notes;
};

template <typename Real>
struct HSReport {
  Real hs_exact;        ///< sum_n v_n int_C d mu / |z - gamma_n|^2
  Real local_sum;       ///< sum_n A_n
  Real global_sum;      ///< sum_m v_m sum_{j>m} tau_j^2 + sum_m v_m/|gamma_m|^2 sum_{j<m} mu(Omega_j)
  bool hs_finite;
  bool condition_finite;
  RealVector<Real> q_energy;  ///< int |q_n|^2 d mu per index
};

struct CorollaryRegime {
  bool cor_exp_weights;
  bool cor_summable;
  double min_weight_ratio;
  double max_weight_ratio;
  double max_decay_ratio;  ///< max of (v_{n+1}/|gamma_{n+1}|^2) / (v_n/|gamma_n|^2) on the window
};

namespace detail {

/// a * b with 0 * inf = 0 (an empty tail annihilates an infinite factor).
template <typename Real>
Real guarded_product(Real a, Real b) {
  if (a == Real(0) || b == Real(0)) return Real(0);
  return a * b;
}

template <typename Real>
bool has_infinity(const RealVector<Real>& x) {
  using std::isinf;
  for (Index i = 0; i < x.size(); ++i)
    if (isinf(x[i])) return true;
  return false;
}

inline Index resolve_window(Index window, Index size) {
  return std::clamp<Index>(window > 0 ? window : default_window(size), 1, std::max<Index>(1, size));
}

struct Span {
  Index first;
  Index last;  // inclusive; last < first means empty
};

inline Span a_window(Index window, Index size) { return {std::max<Index>(0, size - window), size - 1}; }
/// D_{N} has empty tail factors at truncation, so its window stops one short.
inline Span d_window(Index window, Index size) { return {std::max<Index>(0, size - 1 - window), size - 2}; }

template <typename Real>
Real max_successive_ratio(const RealVector<Real>& x, Span s) {
  Real worst = std::numeric_limits<Real>::quiet_NaN();
  Real previous = Real(0);
  bool have_previous = false;
  for (Index i = s.first; i <= s.last; ++i) {
    if (x[i] == Real(0)) continue;
    if (have_previous) {
      const Real ratio = x[i] / previous;
      worst = (worst == worst) ? std::max(worst, ratio) : ratio;
    }
    previous = x[i];
    have_previous = true;
  }
  return worst;
}

template <typename Real>
Real min_successive_ratio(const RealVector<Real>& x, Span s) {
  Real best = std::numeric_limits<Real>::quiet_NaN();
  Real previous = Real(0);
  bool have_previous = false;
  for (Index i = s.first; i <= s.last; ++i) {
    if (x[i] == Real(0)) continue;
    if (have_previous) {
      const Real ratio = x[i] / previous;
      best = (best == best) ? std::min(best, ratio) : ratio;
    }
    previous = x[i];
    have_previous = true;
  }
  return best;
}

template <typename Real>
bool all_zero(const RealVector<Real>& x, Span s) {
  for (Index i = s.first; i <= s.last; ++i)
    if (x[i] != Real(0)) return false;
  return true;
}

template <typename Real>
bool nonincreasing(const RealVector<Real>& x, Span s, double slack) {
  for (Index i = s.first; i < s.last; ++i)
    if (x[i + 1] > x[i] * (Real(1) + Real(slack))) return false;
  return true;
}

template <typename Real>
bool decaying(const RealVector<Real>& x, Span s, double margin) {
  if (s.last < s.first || all_zero(x, s)) return true;
  const Real ratio = max_successive_ratio(x, s);
  return ratio == ratio && ratio < Real(1) - Real(margin);
}

template <typename Real>
void window_extrema(const RealVector<Real>& x, Span s, Real& lo, Real& hi) {
  lo = std::numeric_limits<Real>::infinity();
  hi = Real(0);
  if (s.last < s.first) {
    lo = Real(0);
    return;
  }
  for (Index i = s.first; i <= s.last; ++i) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
}

template <typename Real>
Real argmax(const RealVector<Real>& x, Index& where) {
  where = 0;
  Real best = Real(0);
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] > best) {
      best = x[i];
      where = i;
    }
  }
  return best;
}

template <typename Real>
void hypothesis_notes(const SpacePair<Real>& space, std::vector<std::string>& notes) {
  if (!space.gamma().sparse()) notes.emplace_back("warning: sparseness condition not satisfied on the truncation");
  if (space.admissibility().flag != Tristate::yes)
    notes.emplace_back(std::string("warning: admissibility is ") + to_string(space.admissibility().flag));
}

}  // namespace detail

template <typename Real>
QuantitySequences<Real> quantity_sequences(const SpacePair<Real>& space, const Measure<Real>& measure,
                                           Diagnostics* diagnostics = nullptr) {
  const Index size = space.size();
  const auto& partition = space.partition();
  const auto& v = space.weights();
  QuantitySequences<Real> q;
  q.A.resize(size);
  q.tau_sq.resize(size);
  q.mass.resize(size);
  q.Vhat.resize(size);
  q.P.resize(size);
  q.P_upper.resize(size);
  q.D.resize(size);

  for (Index n = 0; n < size; ++n) {
    q.A[n] = detail::guarded_product(v[n], int_inv_sq_dist(measure, partition, n, space.gamma()[n], diagnostics));
    q.tau_sq[n] = int_inv_sq_modulus(measure, partition, n, diagnostics);
    q.mass[n] = mass(measure, partition, n, diagnostics);
  }

  // Prefix and tail sums: one sequential pass each.
  RealVector<Real> tau_tail(size);   // sum_{m>n} tau_sq_m
  RealVector<Real> mass_head(size);  // sum_{m<=n} mass_m
  RealVector<Real> decay_terms(size);
  for (Index n = 0; n < size; ++n) {
    const Real r = space.gamma().moduli()[n];
    decay_terms[n] = v[n] / (r * r);
  }
  Real running = Real(0);
  for (Index n = 0; n < size; ++n) {
    running += v[n];
    q.Vhat[n] = running;
  }
  running = Real(0);
  for (Index n = 0; n < size; ++n) {
    running += q.mass[n];
    mass_head[n] = running;
  }
  Real tail_tau = Real(0);
  Real tail_p = Real(0);
  for (Index n = size - 1; n >= 0; --n) {
    tau_tail[n] = tail_tau;
    q.P[n] = tail_p;
    tail_tau += q.tau_sq[n];
    tail_p += decay_terms[n];
  }

  // Geometric bound on sum_{m>N} v_m/|gamma_m|^2 from the windowed ratio.
  q.tail_ratio_P = std::numeric_limits<Real>::quiet_NaN();
  Real beyond = std::numeric_limits<Real>::infinity();
  if (size >= 2) {
    const Index window = default_window(size);
    Real worst = Real(0);
    for (Index k = std::max<Index>(1, size - 1 - window); k + 1 < size; ++k)
      worst = std::max(worst, Real(decay_terms[k + 1] / decay_terms[k]));
    q.tail_ratio_P = worst;
    if (space.admissibility().flag == Tristate::yes && worst < Real(1))
      beyond = decay_terms[size - 1] * worst / (Real(1) - worst);
  }
  for (Index n = 0; n < size; ++n) q.P_upper[n] = q.P[n] + beyond;

  for (Index n = 0; n < size; ++n)
    q.D[n] = detail::guarded_product(q.Vhat[n], tau_tail[n]) + detail::guarded_product(q.P[n], mass_head[n]);
  return q;
}

template <typename Real>
Certificate<Real> carleson_check(const SpacePair<Real>& space, const Measure<Real>& measure,
                                 const QuantitySequences<Real>& q, const CriteriaOptions& options = {}) {
  const Index size = space.size();
  const Index window = detail::resolve_window(options.window, size);
  const auto aw = detail::a_window(window, size);
  const auto dw = detail::d_window(window, size);

  Certificate<Real> cert;
  detail::hypothesis_notes(space, cert.notes);
  cert.sup_A = detail::argmax(q.A, cert.witness_A);
  cert.sup_D = detail::argmax(q.D, cert.witness_D);
  cert.c_star = std::max(cert.sup_A, cert.sup_D);
  cert.window_begin = aw.first;
  cert.window_end = aw.last;
  detail::window_extrema(q.A, aw, cert.window_min_A, cert.window_max_A);
  detail::window_extrema(q.D, dw, cert.window_min_D, cert.window_max_D);
  cert.decay_ratio_A = detail::max_successive_ratio(q.A, aw);
  cert.decay_ratio_D = detail::max_successive_ratio(q.D, dw);

  if (detail::has_infinity(q.A) || detail::has_infinity(q.D)) {
    cert.verdict = Verdict::fails;
    cert.notes.emplace_back("a certificate quantity is infinite");
    return cert;
  }
  const auto last = measure.last_charged_annulus(space.partition());
  if (!last || *last < size - 1) {
    cert.verdict = Verdict::holds;
    cert.tail = TailMode::exhausted;
    return cert;
  }
  if (options.tail_monotone) {
    cert.verdict = Verdict::holds;
    cert.tail = TailMode::declared_monotone;
    return cert;
  }
  const Real growth_A = detail::min_successive_ratio(q.A, aw);
  const Real growth_D = detail::min_successive_ratio(q.D, dw);
  const Real grow = Real(1) + Real(options.decay_margin);
  if ((growth_A == growth_A && growth_A > grow) || (growth_D == growth_D && growth_D > grow)) {
    cert.verdict = Verdict::fails;
    cert.tail = TailMode::stabilized;
    cert.notes.emplace_back("window quantities grow geometrically");
    return cert;
  }
  if (detail::nonincreasing(q.A, aw, options.bounded_slack) && detail::nonincreasing(q.D, dw, options.bounded_slack)) {
    cert.verdict = Verdict::holds;
    cert.tail = TailMode::stabilized;
    return cert;
  }
  cert.verdict = Verdict::inconclusive;
  cert.notes.emplace_back("window quantities neither settle nor grow geometrically");
  return cert;
}

template <typename Real>
Certificate<Real> carleson_check(const SpacePair<Real>& space, const Measure<Real>& measure,
                                 const CriteriaOptions& options = {}) {
  return carleson_check(space, measure, quantity_sequences(space, measure), options);
}

/// Vanishing-tail test. A compact embedding is bounded, so a failed
/// boundedness certificate fails here too.
template <typename Real>
Certificate<Real> compactness_check(const SpacePair<Real>& space, const Measure<Real>& measure,
                                    const QuantitySequences<Real>& q, const Certificate<Real>& carleson,
                                    const CriteriaOptions& options = {}) {
  const Index size = space.size();
  const Index window = detail::resolve_window(options.window, size);
  const auto aw = detail::a_window(window, size);
  const auto dw = detail::d_window(window, size);

  Certificate<Real> cert = carleson;
  cert.notes.clear();
  detail::hypothesis_notes(space, cert.notes);
  cert.tail = TailMode::unresolved;

  if (carleson.verdict == Verdict::fails) {
    cert.verdict = Verdict::fails;
    cert.notes.emplace_back("boundedness certificate fails");
    return cert;
  }
  const auto last = measure.last_charged_annulus(space.partition());
  if (!last || *last < size - 1) {
    cert.verdict = Verdict::holds;
    cert.tail = TailMode::exhausted;
    return cert;
  }
  if (detail::decaying(q.A, aw, options.decay_margin) && detail::decaying(q.D, dw, options.decay_margin)) {
    cert.verdict = Verdict::holds;
    cert.tail = TailMode::stabilized;
    return cert;
  }
  const Real floor = Real(options.liminf_floor);
  const bool a_stuck = !detail::decaying(q.A, aw, options.decay_margin) && cert.window_min_A >= floor;
  const bool d_stuck = !detail::decaying(q.D, dw, options.decay_margin) && cert.window_min_D >= floor;
  if (a_stuck || d_stuck) {
    cert.verdict = Verdict::fails;
    cert.tail = TailMode::stabilized;
    cert.notes.emplace_back(a_stuck ? "local quantity A_n does not vanish on the window"
                                    : "global quantity D_n does not vanish on the window");
    return cert;
  }
  cert.verdict = Verdict::inconclusive;
  cert.notes.emplace_back("window quantities are small but not stably decaying");
  return cert;
}

template <typename Real>
Certificate<Real> compactness_check(const SpacePair<Real>& space, const Measure<Real>& measure,
                                    const CriteriaOptions& options = {}) {
  const auto q = quantity_sequences(space, measure);
  return compactness_check(space, measure, q, carleson_check(space, measure, q, options), options);
}

/// int |q_n|^2 d mu = v_n int_C d mu / |z - gamma_n|^2, accumulated annulus by
/// annulus in index order.
template <typename Real>
RealVector<Real> q_energy(const SpacePair<Real>& space, const Measure<Real>& measure,
                          Diagnostics* diagnostics = nullptr) {
  const Index size = space.size();
  RealVector<Real> energy(size);
  std::vector<Real> pieces(static_cast<std::size_t>(size));
  for (Index n = 0; n < size; ++n) {
    for (Index m = 0; m < size; ++m)
      pieces[static_cast<std::size_t>(m)] =
          int_inv_sq_dist(measure, space.partition(), m, space.gamma()[n], diagnostics);
    energy[n] = detail::guarded_product(space.weights()[n], pairwise_sum(pieces));
  }
  return energy;
}

template <typename Real>
HSReport<Real> hs_check(const SpacePair<Real>& space, const Measure<Real>& measure, const QuantitySequences<Real>& q,
                        Diagnostics* diagnostics = nullptr) {
  using std::isfinite;
  const Index size = space.size();
  HSReport<Real> report;
  report.q_energy = q_energy(space, measure, diagnostics);
  std::vector<Real> terms(report.q_energy.data(), report.q_energy.data() + size);
  report.hs_exact = pairwise_sum(terms);
  terms.assign(q.A.data(), q.A.data() + size);
  report.local_sum = pairwise_sum(terms);

  // sum_m v_m sum_{j>m} tau_j^2 + sum_m (v_m/|gamma_m|^2) sum_{j<m} mu(Omega_j)
  std::vector<Real> global;
  Real tail_tau = Real(0);
  std::vector<Real> first(static_cast<std::size_t>(size));
  for (Index m = size - 1; m >= 0; --m) {
    first[static_cast<std::size_t>(m)] = detail::guarded_product(space.weights()[m], tail_tau);
    tail_tau += q.tau_sq[m];
  }
  Real head_mass = Real(0);
  std::vector<Real> second(static_cast<std::size_t>(size));
  for (Index m = 0; m < size; ++m) {
    const Real r = space.gamma().moduli()[m];
    second[static_cast<std::size_t>(m)] = detail::guarded_product(space.weights()[m] / (r * r), head_mass);
    head_mass += q.mass[m];
  }
  report.global_sum = pairwise_sum(first) + pairwise_sum(second);
  report.hs_finite = static_cast<bool>(isfinite(report.hs_exact));
  report.condition_finite = static_cast<bool>(isfinite(report.local_sum) && isfinite(report.global_sum));
  return report;
}

template <typename Real>
HSReport<Real> hs_check(const SpacePair<Real>& space, const Measure<Real>& measure) {
  return hs_check(space, measure, quantity_sequences(space, measure));
}

/// Detects the weight regimes in which a reduced compactness test suffices:
/// exponentially growing weights with exponentially decaying v_n/|gamma_n|^2,
/// or summable weights.
template <typename Real>
CorollaryRegime corollary_regime(const SpacePair<Real>& space, Index window = 0) {
  const Index size = space.size();
  CorollaryRegime regime{false, false, std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  if (size < 2) return regime;
  window = detail::resolve_window(window, size);
  const auto& v = space.weights();
  const auto& r = space.gamma().moduli();
  double min_w = std::numeric_limits<double>::infinity();
  double max_w = 0.0;
  double max_decay = 0.0;
  for (Index k = std::max<Index>(0, size - 1 - window); k + 1 < size; ++k) {
    const double wr = static_cast<double>(v[k + 1] / v[k]);
    min_w = std::min(min_w, wr);
    max_w = std::max(max_w, wr);
    if (r[k] > Real(0)) {
      const double dr = static_cast<double>((v[k + 1] / (r[k + 1] * r[k + 1])) / (v[k] / (r[k] * r[k])));
      max_decay = std::max(max_decay, dr);
    }
  }
  constexpr double margin = 1e-6;
  regime.min_weight_ratio = min_w;
  regime.max_weight_ratio = max_w;
  regime.max_decay_ratio = max_decay;
  regime.cor_exp_weights = min_w > 1.0 + margin && max_decay < 1.0 - margin;
  regime.cor_summable = max_w < 1.0 - margin;
  return regime;
}

}  // namespace carleson
