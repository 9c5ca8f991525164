#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "carleson/criteria.hpp"
#include "carleson/measure.hpp"
#include "carleson/space.hpp"
#include "carleson/summation.hpp"

namespace carleson {

/// Rows are atoms, columns are space indices:
///   E(j, n) = sqrt(w_j) sqrt(v_n) / (z_j - gamma_n).
/// E acts on b_n = a_n sqrt(v_n), so (E b)_j = sqrt(w_j) f(z_j) and
/// ||E b||^2 = int |f|^2 d mu.
template <typename Real>
using EmbeddingMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
EmbeddingMatrix<Real> build_embedding(const SpacePair<Real>& space, const Measure<Real>& measure) {
  using std::sqrt;
  if (!measure.atoms_only()) throw InvalidInstance("embedding matrix needs an atoms-only measure; discretize first");
  measure.validate_against(space);
  const auto atoms = measure.atoms();
  const Index rows = static_cast<Index>(atoms.size());
  EmbeddingMatrix<Real> e(rows, space.size());
  for (Index j = 0; j < rows; ++j) {
    const auto& atom = atoms[static_cast<std::size_t>(j)];
    const Real sw = sqrt(atom.w);
    for (Index n = 0; n < space.size(); ++n)
      e(j, n) = Complex<Real>(sw * sqrt(space.weights()[n])) / (atom.z - space.gamma()[n]);
  }
  return e;
}

/// b_n = a_n sqrt(v_n): coefficient vector mapped to the unweighted l2 side.
template <typename Real>
ComplexVector<Real> normalized_coefficients(const SpacePair<Real>& space, const CoefficientVector<Real>& a) {
  using std::sqrt;
  ComplexVector<Real> b(a.size());
  for (Index n = 0; n < a.size(); ++n) b[n] = a[n] * sqrt(space.weights()[n]);
  return b;
}

struct PowerIterationOptions {
  double tol = 1e-10;  ///< relative residual ||G x - lambda x|| / lambda
  int max_iterations = 10000;
};

template <typename Real>
struct EigenEstimate {
  Real value = Real(0);
  ComplexVector<Real> vector;
  int iterations = 0;
  Real residual = Real(0);
  bool converged = true;
};

/// Hermitian Gram matrix on the smaller side of E.
template <typename Real>
EmbeddingMatrix<Real> gram(const EmbeddingMatrix<Real>& e) {
  if (e.rows() <= e.cols()) return e * e.adjoint();
  return e.adjoint() * e;
}

namespace detail {

/// Fixed pseudo-random start vector (splitmix64 stream) for deflated passes.
template <typename Real>
ComplexVector<Real> scrambled_start(Index size, std::uint64_t seed) {
  ComplexVector<Real> x(size);
  std::uint64_t state = 0x9E3779B97F4A7C15ull * (seed + 1);
  auto next = [&state]() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  };
  for (Index i = 0; i < size; ++i) {
    const double re = 0.5 + next();
    const double im = next() - 0.5;
    x[i] = Complex<Real>(Real(re), Real(im));
  }
  return x;
}

}  // namespace detail

/// Largest eigenvalue of a Hermitian positive semidefinite matrix by power
/// iteration from the given start vector.
template <typename Real>
EigenEstimate<Real> dominant_eigenpair(const EmbeddingMatrix<Real>& g, ComplexVector<Real> x,
                                       const PowerIterationOptions& options = {}) {
  EigenEstimate<Real> est;
  if (g.rows() == 0) return est;
  Real norm = x.norm();
  if (norm == Real(0)) return est;
  x /= norm;
  ComplexVector<Real> y = g * x;
  if (y.norm() == Real(0)) {
    est.vector = x;
    return est;
  }
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Real lambda = x.dot(y).real();
    const Real residual = (y - lambda * x).norm();
    est.iterations = it;
    est.value = lambda;
    est.residual = lambda > Real(0) ? residual / lambda : std::numeric_limits<Real>::infinity();
    if (lambda > Real(0) && residual <= Real(options.tol) * lambda) {
      est.vector = x;
      est.converged = true;
      return est;
    }
    norm = y.norm();
    if (norm == Real(0)) break;
    x = y / norm;
    y = g * x;
  }
  est.vector = x;
  est.converged = false;
  return est;
}

/// Largest singular value of E (power iteration on the smaller Gram matrix,
/// all-ones start).
template <typename Real>
EigenEstimate<Real> operator_norm_sq(const EmbeddingMatrix<Real>& e, const PowerIterationOptions& options = {}) {
  if (e.rows() == 0 || e.cols() == 0) return {};
  const EmbeddingMatrix<Real> g = gram(e);
  auto est = dominant_eigenpair<Real>(g, ComplexVector<Real>::Ones(g.rows()), options);
  if (est.value == Real(0) && g.norm() > Real(0))
    est = dominant_eigenpair<Real>(g, detail::scrambled_start<Real>(g.rows(), 0), options);
  return est;
}

template <typename Real>
struct SpectralSummary {
  Real op_norm = Real(0);
  std::vector<Real> top_singular_values;
  Real frobenius = Real(0);
  Real frobenius_sq = Real(0);
  std::vector<std::pair<Index, Real>> tail_norms;  ///< N0 -> ||E restricted to columns n > N0||
  int iterations = 0;
  Real residual = Real(0);
  bool converged = true;
};

template <typename Real>
Real frobenius_sq(const EmbeddingMatrix<Real>& e) {
  std::vector<Real> rows(static_cast<std::size_t>(e.rows()));
  std::vector<Real> entries(static_cast<std::size_t>(e.cols()));
  for (Index j = 0; j < e.rows(); ++j) {
    for (Index n = 0; n < e.cols(); ++n) entries[static_cast<std::size_t>(n)] = std::norm(e(j, n));
    rows[static_cast<std::size_t>(j)] = pairwise_sum(entries);
  }
  return pairwise_sum(rows);
}

/// Operator norm, top-k singular values by deflation, Frobenius norm, and the
/// norms of the column tails E[:, N0:] for each N0 in tail_grid (N0 counts the
/// leading columns removed).
template <typename Real>
SpectralSummary<Real> spectral_summary(const EmbeddingMatrix<Real>& e, int k, const std::vector<Index>& tail_grid,
                                       const PowerIterationOptions& options = {}) {
  using std::sqrt;
  SpectralSummary<Real> s;
  s.frobenius_sq = frobenius_sq(e);
  s.frobenius = sqrt(s.frobenius_sq);
  if (e.rows() > 0 && e.cols() > 0) {
    EmbeddingMatrix<Real> g = gram(e);
    const Index rank_cap = g.rows();
    for (int i = 0; i < k && i < rank_cap; ++i) {
      ComplexVector<Real> start = i == 0 ? ComplexVector<Real>::Ones(g.rows()) : detail::scrambled_start<Real>(g.rows(), static_cast<std::uint64_t>(i));
      auto est = dominant_eigenpair<Real>(g, start, options);
      if (i == 0 && est.value == Real(0) && g.norm() > Real(0))
        est = dominant_eigenpair<Real>(g, detail::scrambled_start<Real>(g.rows(), 0), options);
      const Real value = std::max(est.value, Real(0));
      s.top_singular_values.push_back(sqrt(value));
      if (i == 0) {
        s.op_norm = sqrt(value);
        s.iterations = est.iterations;
        s.residual = est.residual;
      }
      s.converged = s.converged && est.converged;
      if (value == Real(0)) break;
      g -= value * est.vector * est.vector.adjoint();
    }
  }
  for (Index cut : tail_grid) {
    Real norm = Real(0);
    if (cut >= 0 && cut < e.cols() && e.rows() > 0) {
      const EmbeddingMatrix<Real> tail = e.rightCols(e.cols() - cut);
      const auto est = operator_norm_sq<Real>(tail, options);
      norm = sqrt(std::max(est.value, Real(0)));
      s.converged = s.converged && est.converged;
    } else if (cut < 0) {
      norm = s.op_norm;
    }
    s.tail_norms.emplace_back(cut, norm);
  }
  return s;
}

struct ValidationOptions {
  int resolution = 64;                ///< discretization K for continuous components
  int top_k = 3;
  double lower_bound_tol = 1e-9;      ///< op_norm^2 >= max_n int |q_n|^2 d mu - tol
  double hs_rel_tol = 1e-10;
  double compact_tail_fraction = 1e-3;    ///< compact: last tail norm below this fraction of op_norm
  double noncompact_tail_fraction = 0.5;  ///< not compact: every tail norm at least this fraction
  std::vector<Index> tail_grid;       ///< empty selects 0, 1, ..., N-1
  PowerIterationOptions power;
};

struct ConsistencyRecord {
  double op_norm_sq = 0.0;
  double max_q_energy = 0.0;
  bool lower_bound_ok = true;
  double max_test_vector_energy = 0.0;  ///< max ||E b||^2 over the q, g, h test vectors
  bool test_vectors_ok = true;
  double c_star = 0.0;
  double ratio = 0.0;  ///< op_norm^2 / C_*
  bool ratio_ok = true;
  double frobenius_sq = 0.0;
  double hs_exact = 0.0;
  double hs_rel_error = 0.0;
  bool hs_ok = true;
  std::string tail_trend;
  bool tail_consistent = true;
  bool converged = true;
  int discretized_atoms = 0;
  std::vector<std::string> findings;

  bool consistent() const { return lower_bound_ok && test_vectors_ok && ratio_ok && hs_ok && tail_consistent; }
};

template <typename Real>
struct OracleResult {
  SpectralSummary<Real> spectral;
  ConsistencyRecord record;
};

/// Cross-checks the certificates against the brute-force embedding operator of
/// the (discretized) measure. Disagreements are recorded as findings.
template <typename Real>
OracleResult<Real> validate(const SpacePair<Real>& space, const Measure<Real>& measure,
                            const Certificate<Real>& carleson, const Certificate<Real>& compactness,
                            const ValidationOptions& options = {}) {
  using std::abs;
  using std::isfinite;
  const Measure<Real> atomic = measure.atoms_only() ? measure : discretize(measure, options.resolution);
  const auto e = build_embedding(space, atomic);

  std::vector<Index> grid = options.tail_grid;
  if (grid.empty())
    for (Index n = 0; n < space.size(); ++n) grid.push_back(n);

  OracleResult<Real> out;
  out.spectral = spectral_summary(e, options.top_k, grid, options.power);
  auto& rec = out.record;
  const Real op_sq = out.spectral.op_norm * out.spectral.op_norm;
  rec.op_norm_sq = static_cast<double>(op_sq);
  rec.converged = out.spectral.converged;
  rec.discretized_atoms = static_cast<int>(e.rows());
  if (!rec.converged) rec.findings.emplace_back("power iteration did not reach the residual target");

  const auto q = quantity_sequences(space, atomic);
  const auto hs = hs_check(space, atomic, q);
  Real max_q = Real(0);
  for (Index n = 0; n < hs.q_energy.size(); ++n) max_q = std::max(max_q, Real(hs.q_energy[n]));
  rec.max_q_energy = static_cast<double>(max_q);
  rec.lower_bound_ok = op_sq >= max_q - Real(options.lower_bound_tol);
  if (!rec.lower_bound_ok) rec.findings.emplace_back("operator norm below the q_n lower bound");

  Real max_test = Real(0);
  for (TestFunction kind : {TestFunction::q, TestFunction::g, TestFunction::h}) {
    for (Index n = 0; n < space.size(); ++n) {
      if ((kind == TestFunction::g && n + 1 >= space.size()) || (kind == TestFunction::h && n == 0)) continue;
      const auto b = normalized_coefficients(space, test_function(space, kind, n));
      max_test = std::max(max_test, Real((e * b).squaredNorm()));
    }
  }
  rec.max_test_vector_energy = static_cast<double>(max_test);
  rec.test_vectors_ok = op_sq >= max_test - Real(options.lower_bound_tol) * std::max(Real(1), op_sq);
  if (!rec.test_vectors_ok) rec.findings.emplace_back("a unit test vector exceeds the operator norm");

  rec.c_star = static_cast<double>(carleson.c_star);
  if (carleson.c_star > Real(0)) {
    rec.ratio = static_cast<double>(op_sq / carleson.c_star);
  } else {
    rec.ratio = op_sq == Real(0) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (carleson.verdict == Verdict::holds && carleson.c_star > Real(0))
    rec.ratio_ok = std::isfinite(rec.ratio) && rec.ratio > 0.0;
  if (!rec.ratio_ok) rec.findings.emplace_back("op_norm^2 / C_* is not finite and positive");

  rec.frobenius_sq = static_cast<double>(out.spectral.frobenius_sq);
  rec.hs_exact = static_cast<double>(hs.hs_exact);
  const Real scale = std::max(abs(hs.hs_exact), abs(out.spectral.frobenius_sq));
  rec.hs_rel_error = scale > Real(0) ? static_cast<double>(abs(hs.hs_exact - out.spectral.frobenius_sq) / scale) : 0.0;
  rec.hs_ok = rec.hs_rel_error <= options.hs_rel_tol;
  if (!rec.hs_ok) rec.findings.emplace_back("Frobenius norm disagrees with the Hilbert-Schmidt integral");

  const auto& tails = out.spectral.tail_norms;
  if (compactness.tail == TailMode::exhausted) {
    rec.tail_trend = "finite_rank";
  } else if (compactness.verdict == Verdict::holds) {
    bool nonincreasing = true;
    for (std::size_t i = 1; i < tails.size(); ++i)
      if (tails[i].second > tails[i - 1].second * Real(1 + 1e-9)) nonincreasing = false;
    const bool small = tails.empty() || tails.back().second < Real(options.compact_tail_fraction) * out.spectral.op_norm;
    rec.tail_trend = "decaying";
    rec.tail_consistent = nonincreasing && small;
    if (!rec.tail_consistent) rec.findings.emplace_back("compact verdict but tail norms do not decay");
  } else if (compactness.verdict == Verdict::fails) {
    bool flat = true;
    for (const auto& [cut, norm] : tails)
      if (norm < Real(options.noncompact_tail_fraction) * out.spectral.op_norm) flat = false;
    rec.tail_trend = "flat";
    rec.tail_consistent = flat;
    if (!rec.tail_consistent) rec.findings.emplace_back("non-compact verdict but tail norms fall off");
  } else {
    rec.tail_trend = "not_assessed";
  }
  return out;
}

}  // namespace carleson
