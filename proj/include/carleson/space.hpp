#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carleson/errors.hpp"
#include "carleson/summation.hpp"

namespace carleson {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;
template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <typename Real>
using ComplexVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

/// Coefficients (a_n) of f(z) = sum_n a_n v_n / (z - gamma_n). The space norm
/// of f is the weighted l2 norm sum_n |a_n|^2 v_n.
template <typename Real>
using CoefficientVector = ComplexVector<Real>;

enum class Tristate { yes, no, inconclusive };

inline const char* to_string(Tristate t) {
  switch (t) {
    case Tristate::yes: return "yes";
    case Tristate::no: return "no";
    case Tristate::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

/// Number of trailing indices inspected by the windowed tail tests.
inline Index default_window(Index n) { return std::max<Index>(1, (n + 3) / 4); }

template <typename Real>
Real modulus(const Complex<Real>& z) {
  using std::abs;
  return abs(z);
}

template <typename Real>
struct SparsenessReport {
  Real ratio;
  bool satisfied;
};

/// Node sequence gamma_1..gamma_N with strictly increasing moduli.
template <typename Real>
class GammaSequence {
 public:
  explicit GammaSequence(ComplexVector<Real> entries, std::string generator = {})
      : entries_(std::move(entries)), generator_(std::move(generator)) {
    using std::isfinite;
    if (entries_.size() < 1) throw InvalidInstance("node sequence is empty");
    moduli_.resize(entries_.size());
    for (Index n = 0; n < entries_.size(); ++n) {
      if (!isfinite(entries_[n].real()) || !isfinite(entries_[n].imag()))
        throw InvalidInstance("node " + std::to_string(n + 1) + " is not finite");
      moduli_[n] = modulus(entries_[n]);
      if (n > 0 && !(moduli_[n - 1] < moduli_[n]))
        throw InvalidInstance("node moduli must be strictly increasing (violated at index " +
                              std::to_string(n + 1) + ")");
    }
    if (entries_.size() >= 2) {
      Real r = moduli_[1] / moduli_[0];
      for (Index n = 1; n + 1 < entries_.size(); ++n) r = std::min(r, Real(moduli_[n + 1] / moduli_[n]));
      ratio_ = r;
    }
  }

  Index size() const { return entries_.size(); }
  const ComplexVector<Real>& entries() const { return entries_; }
  const Complex<Real>& operator[](Index n) const { return entries_[n]; }
  const RealVector<Real>& moduli() const { return moduli_; }
  const std::string& generator() const { return generator_; }

  /// min_n |gamma_{n+1}| / |gamma_n|; empty for a single node. Infinite when
  /// gamma_1 = 0.
  const std::optional<Real>& sparseness_ratio() const { return ratio_; }
  bool sparse() const { return ratio_ && *ratio_ > Real(1); }

 private:
  ComplexVector<Real> entries_;
  RealVector<Real> moduli_;
  std::optional<Real> ratio_;
  std::string generator_;
};

template <typename Real>
class WeightSequence {
 public:
  explicit WeightSequence(RealVector<Real> entries, std::string generator = {})
      : entries_(std::move(entries)), generator_(std::move(generator)) {
    using std::isfinite;
    for (Index n = 0; n < entries_.size(); ++n) {
      if (!isfinite(entries_[n]) || !(entries_[n] > Real(0)))
        throw InvalidInstance("weight " + std::to_string(n + 1) + " must be positive and finite");
    }
  }

  Index size() const { return entries_.size(); }
  const RealVector<Real>& entries() const { return entries_; }
  Real operator[](Index n) const { return entries_[n]; }
  const std::string& generator() const { return generator_; }

 private:
  RealVector<Real> entries_;
  std::string generator_;
};

/// Rings around the origin with radii at the midpoints of consecutive node
/// moduli. Omega_1 is the open inner disc, Omega_n = [b_{n-1}, b_n) for the
/// middle indices and the outermost ring is closed off to infinity.
template <typename Real>
class AnnulusPartition {
 public:
  explicit AnnulusPartition(const GammaSequence<Real>& gamma) : size_(gamma.size()) {
    const auto& m = gamma.moduli();
    boundaries_.resize(std::max<Index>(0, size_ - 1));
    for (Index n = 0; n + 1 < size_; ++n) boundaries_[n] = (m[n] + m[n + 1]) / Real(2);
    for (Index n = 0; n + 1 < boundaries_.size(); ++n) {
      if (!(boundaries_[n] < boundaries_[n + 1]))
        throw InvalidInstance("annulus boundaries are not strictly increasing");
    }
    for (Index n = 0; n < size_; ++n) {
      if (index_of_modulus(m[n]) != n)
        throw InvalidInstance("node " + std::to_string(n + 1) + " does not lie in its own annulus");
    }
  }

  Index size() const { return size_; }
  const RealVector<Real>& boundaries() const { return boundaries_; }

  Real inner_radius(Index n) const { return n == 0 ? Real(0) : boundaries_[n - 1]; }
  Real outer_radius(Index n) const {
    return n + 1 >= size_ ? std::numeric_limits<Real>::infinity() : boundaries_[n];
  }

  /// Annulus containing every point of modulus rho (rho >= 0).
  Index index_of_modulus(Real rho) const {
    const Real* first = boundaries_.data();
    const Real* last = first + boundaries_.size();
    return static_cast<Index>(std::upper_bound(first, last, rho) - first);
  }

 private:
  Index size_;
  RealVector<Real> boundaries_;
};

template <typename Real>
Index annulus_of(const AnnulusPartition<Real>& partition, const Complex<Real>& z) {
  return partition.index_of_modulus(modulus(z));
}

template <typename Real>
struct AdmissibilityReport {
  Real partial;     ///< sum_{n<=N} v_n / (1 + |gamma_n|^2)
  Real tail_ratio;  ///< max successive term ratio over the trailing window; NaN when N < 2
  Tristate flag;
};

template <typename Real>
SparsenessReport<Real> sparseness_report(const GammaSequence<Real>& gamma) {
  if (gamma.size() < 2) throw InvalidInstance("sparseness needs at least two nodes");
  const Real r = *gamma.sparseness_ratio();
  return {r, r > Real(1)};
}

template <typename Real>
AdmissibilityReport<Real> admissibility_report(const GammaSequence<Real>& gamma,
                                               const WeightSequence<Real>& v, Index window = 0) {
  const Index n_total = gamma.size();
  std::vector<Real> terms(static_cast<std::size_t>(n_total));
  for (Index n = 0; n < n_total; ++n) {
    const Real m = gamma.moduli()[n];
    terms[static_cast<std::size_t>(n)] = v[n] / (Real(1) + m * m);
  }
  AdmissibilityReport<Real> report{pairwise_sum(terms), std::numeric_limits<Real>::quiet_NaN(),
                                   Tristate::inconclusive};
  if (n_total < 2) return report;
  if (window <= 0) window = default_window(n_total);
  const Index first = std::max<Index>(0, n_total - 1 - window);
  bool nondecreasing = true;
  Real worst = Real(0);
  for (Index k = first; k + 1 < n_total; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Real ratio = terms[i + 1] / terms[i];
    worst = std::max(worst, ratio);
    if (terms[i + 1] < terms[i]) nondecreasing = false;
  }
  report.tail_ratio = worst;
  if (worst < Real(1) - Real(1e-6))
    report.flag = Tristate::yes;
  else if (nondecreasing)
    report.flag = Tristate::no;
  return report;
}

/// The pair (Gamma, v) at truncation N, together with its annulus partition
/// and hypothesis diagnostics. Immutable.
template <typename Real>
class SpacePair {
 public:
  SpacePair(GammaSequence<Real> gamma, WeightSequence<Real> v)
      : gamma_(std::move(gamma)), v_(std::move(v)), partition_(gamma_) {
    if (gamma_.size() != v_.size())
      throw InvalidInstance("node and weight sequences differ in length (" +
                            std::to_string(gamma_.size()) + " vs " + std::to_string(v_.size()) + ")");
    admissibility_ = admissibility_report(gamma_, v_);
  }

  Index size() const { return gamma_.size(); }
  const GammaSequence<Real>& gamma() const { return gamma_; }
  const WeightSequence<Real>& weights() const { return v_; }
  const AnnulusPartition<Real>& partition() const { return partition_; }
  const AdmissibilityReport<Real>& admissibility() const { return admissibility_; }

  /// Index n with z == gamma_n exactly, if any.
  std::optional<Index> node_at(const Complex<Real>& z) const {
    const Index n = annulus_of(partition_, z);
    if (gamma_[n] == z) return n;
    return std::nullopt;
  }

 private:
  GammaSequence<Real> gamma_;
  WeightSequence<Real> v_;
  AnnulusPartition<Real> partition_;
  AdmissibilityReport<Real> admissibility_;
};

template <typename Real>
AdmissibilityReport<Real> admissibility_report(const SpacePair<Real>& space, Index window = 0) {
  return admissibility_report(space.gamma(), space.weights(), window);
}

namespace detail {

template <typename Real>
void require_off_gamma(const SpacePair<Real>& space, const Complex<Real>& z) {
  if (auto n = space.node_at(z))
    throw PointOnGamma("point coincides with node " + std::to_string(*n + 1));
}

template <typename Real>
void require_length(const SpacePair<Real>& space, const CoefficientVector<Real>& a) {
  if (a.size() != space.size())
    throw InvalidInstance("coefficient vector has length " + std::to_string(a.size()) + ", expected " +
                          std::to_string(space.size()));
}

}  // namespace detail

/// ||a||^2 = sum_n |a_n|^2 v_n.
template <typename Real>
Real norm_sq(const SpacePair<Real>& space, const CoefficientVector<Real>& a) {
  detail::require_length(space, a);
  std::vector<Real> terms(static_cast<std::size_t>(a.size()));
  for (Index n = 0; n < a.size(); ++n) terms[static_cast<std::size_t>(n)] = std::norm(a[n]) * space.weights()[n];
  return pairwise_sum(terms);
}

/// <a, b> = sum_n a_n conj(b_n) v_n.
template <typename Real>
Complex<Real> inner_product(const SpacePair<Real>& space, const CoefficientVector<Real>& a,
                            const CoefficientVector<Real>& b) {
  detail::require_length(space, a);
  detail::require_length(space, b);
  std::vector<Complex<Real>> terms(static_cast<std::size_t>(a.size()));
  for (Index n = 0; n < a.size(); ++n)
    terms[static_cast<std::size_t>(n)] = a[n] * std::conj(b[n]) * space.weights()[n];
  return pairwise_sum(terms);
}

/// Weighted discrete Hilbert transform f(z) = sum_n a_n v_n / (z - gamma_n).
template <typename Real>
Complex<Real> evaluate(const SpacePair<Real>& space, const CoefficientVector<Real>& a, const Complex<Real>& z) {
  detail::require_length(space, a);
  detail::require_off_gamma(space, z);
  std::vector<Complex<Real>> terms(static_cast<std::size_t>(a.size()));
  for (Index n = 0; n < a.size(); ++n)
    terms[static_cast<std::size_t>(n)] = a[n] * space.weights()[n] / (z - space.gamma()[n]);
  return pairwise_sum(terms);
}

/// k_lambda(lambda) = sum_n v_n / |lambda - gamma_n|^2.
template <typename Real>
Real kernel_norm_sq(const SpacePair<Real>& space, const Complex<Real>& lambda) {
  detail::require_off_gamma(space, lambda);
  std::vector<Real> terms(static_cast<std::size_t>(space.size()));
  for (Index n = 0; n < space.size(); ++n)
    terms[static_cast<std::size_t>(n)] = space.weights()[n] / std::norm(lambda - space.gamma()[n]);
  return pairwise_sum(terms);
}

/// k_lambda(z) = sum_n v_n / (conj(lambda - gamma_n) (z - gamma_n)).
template <typename Real>
Complex<Real> kernel_eval(const SpacePair<Real>& space, const Complex<Real>& lambda, const Complex<Real>& z) {
  detail::require_off_gamma(space, lambda);
  detail::require_off_gamma(space, z);
  std::vector<Complex<Real>> terms(static_cast<std::size_t>(space.size()));
  for (Index n = 0; n < space.size(); ++n) {
    const Complex<Real> denom = std::conj(lambda - space.gamma()[n]) * (z - space.gamma()[n]);
    terms[static_cast<std::size_t>(n)] = Complex<Real>(space.weights()[n]) / denom;
  }
  return pairwise_sum(terms);
}

/// Coefficients of k_lambda, so that <a, k_lambda> = evaluate(a, lambda).
template <typename Real>
CoefficientVector<Real> kernel_coefficients(const SpacePair<Real>& space, const Complex<Real>& lambda) {
  detail::require_off_gamma(space, lambda);
  CoefficientVector<Real> c(space.size());
  for (Index n = 0; n < space.size(); ++n) c[n] = Real(1) / std::conj(lambda - space.gamma()[n]);
  return c;
}

enum class TestFunction { q, g, h };

inline const char* to_string(TestFunction kind) {
  switch (kind) {
    case TestFunction::q: return "q";
    case TestFunction::g: return "g";
    case TestFunction::h: return "h";
  }
  return "?";
}

/// V_n = sum_{m<n} v_m (0-based n: the first n weights).
template <typename Real>
Real head_weight(const SpacePair<Real>& space, Index n) {
  std::vector<Real> terms(space.weights().entries().data(), space.weights().entries().data() + n);
  return pairwise_sum(terms);
}

/// P_n = sum_{m>n} v_m / |gamma_m|^2 over the truncation.
template <typename Real>
Real tail_weight(const SpacePair<Real>& space, Index n) {
  std::vector<Real> terms;
  for (Index m = n + 1; m < space.size(); ++m) {
    const Real r = space.gamma().moduli()[m];
    terms.push_back(space.weights()[m] / (r * r));
  }
  return pairwise_sum(terms);
}

/// Unit-norm test functions (0-based index n):
///   q_n = sqrt(v_n) / (z - gamma_n),
///   g_n = P_n^{-1/2} sum_{m>n} v_m / (conj(gamma_m) (z - gamma_m)),
///   h_n = V_n^{-1/2} sum_{m<n} v_m / (z - gamma_m).
template <typename Real>
CoefficientVector<Real> test_function(const SpacePair<Real>& space, TestFunction kind, Index n) {
  using std::sqrt;
  const Index size = space.size();
  if (n < 0 || n >= size) throw InvalidInstance("test function index out of range");
  CoefficientVector<Real> a = CoefficientVector<Real>::Zero(size);
  switch (kind) {
    case TestFunction::q:
      a[n] = Real(1) / sqrt(space.weights()[n]);
      break;
    case TestFunction::g: {
      if (n + 1 >= size) throw EmptyRange("g_n needs at least one later node");
      const Real scale = Real(1) / sqrt(tail_weight(space, n));
      for (Index m = n + 1; m < size; ++m) a[m] = scale / std::conj(space.gamma()[m]);
      break;
    }
    case TestFunction::h: {
      if (n == 0) throw EmptyRange("h_n needs at least one earlier node");
      const Real scale = Real(1) / sqrt(head_weight(space, n));
      for (Index m = 0; m < n; ++m) a[m] = Complex<Real>(scale);
      break;
    }
  }
  return a;
}

}  // namespace carleson
