#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "carleson/errors.hpp"
#include "carleson/quadrature.hpp"
#include "carleson/space.hpp"
#include "carleson/summation.hpp"

namespace carleson {

template <typename Real>
struct Atom {
  Complex<Real> z;
  Real w;
};

/// Atoms z(n), w(n) for n_lo <= n <= n_hi, expanded when the family is built.
template <typename Real>
struct AtomFamily {
  long n_lo = 0;
  long n_hi = -1;
  std::vector<Atom<Real>> atoms;

  template <typename Generator>
  static AtomFamily generate(long n_lo, long n_hi, Generator&& gen) {
    AtomFamily family{n_lo, n_hi, {}};
    for (long n = n_lo; n <= n_hi; ++n) family.atoms.push_back(gen(n));
    return family;
  }
};

/// Total mass w spread uniformly over the circle |z| = r.
template <typename Real>
struct CircleUniform {
  Real r;
  Real w;
};

/// d mu = c r^alpha dr x (uniform angle) on a <= |z| <= b.
template <typename Real>
struct RadialPower {
  Real a;
  Real b;
  Real alpha;
  Real c;
};

template <typename Real>
using MeasureComponent = std::variant<Atom<Real>, AtomFamily<Real>, CircleUniform<Real>, RadialPower<Real>>;

/// Collects human-readable notes about divergent or unconverged integrals.
struct Diagnostics {
  std::vector<std::string> messages;
  bool quadrature_failed = false;

  void note(std::string message) {
    for (const auto& m : messages)
      if (m == message) return;
    messages.push_back(std::move(message));
  }
};

namespace detail {

template <typename Real>
Real infinity() {
  return std::numeric_limits<Real>::infinity();
}

template <typename Real>
void validate_atom(const Atom<Real>& atom) {
  using std::isfinite;
  if (!isfinite(atom.z.real()) || !isfinite(atom.z.imag())) throw InvalidInstance("atom location is not finite");
  if (!isfinite(atom.w) || atom.w < Real(0)) throw InvalidInstance("atom weight must be finite and nonnegative");
}

template <typename Real>
void validate_component(const MeasureComponent<Real>& component) {
  using std::isfinite;
  std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Atom<Real>>) {
          validate_atom(c);
        } else if constexpr (std::is_same_v<T, AtomFamily<Real>>) {
          for (const auto& atom : c.atoms) validate_atom(atom);
        } else if constexpr (std::is_same_v<T, CircleUniform<Real>>) {
          if (!isfinite(c.r) || c.r < Real(0)) throw InvalidInstance("circle radius must be finite and nonnegative");
          if (!isfinite(c.w) || c.w < Real(0)) throw InvalidInstance("circle mass must be finite and nonnegative");
        } else {
          if (!isfinite(c.a) || !isfinite(c.b) || !(Real(0) <= c.a && c.a < c.b))
            throw InvalidInstance("radial support must satisfy 0 <= a < b");
          if (!isfinite(c.alpha)) throw InvalidInstance("radial exponent must be finite");
          if (!isfinite(c.c) || c.c < Real(0)) throw InvalidInstance("radial coefficient must be nonnegative");
        }
      },
      component);
}

/// integral of r^p over [lo, hi]; +inf when divergent at r = 0.
template <typename Real>
Real power_integral(Real p, Real lo, Real hi) {
  using std::log;
  using std::pow;
  if (!(lo < hi)) return Real(0);
  if (p == Real(-1)) {
    if (lo == Real(0)) return infinity<Real>();
    return log(hi / lo);
  }
  if (lo == Real(0) && p < Real(-1)) return infinity<Real>();
  return (pow(hi, p + Real(1)) - pow(lo, p + Real(1))) / (p + Real(1));
}

template <typename Real>
std::pair<Real, Real> clip(const RadialPower<Real>& radial, const AnnulusPartition<Real>& partition, Index n) {
  using std::max;
  using std::min;
  return {max(radial.a, partition.inner_radius(n)), min(radial.b, partition.outer_radius(n))};
}

}  // namespace detail

/// Finite, nonnegative, finitely described measure. Immutable.
template <typename Real>
class Measure {
 public:
  Measure() = default;
  explicit Measure(std::vector<MeasureComponent<Real>> components) : components_(std::move(components)) {
    for (const auto& c : components_) detail::validate_component(c);
  }

  const std::vector<MeasureComponent<Real>>& components() const { return components_; }
  bool empty() const { return components_.empty(); }

  /// Point masses from Atom and AtomFamily components, in declaration order.
  std::vector<Atom<Real>> atoms() const {
    std::vector<Atom<Real>> out;
    for (const auto& c : components_) {
      if (const auto* atom = std::get_if<Atom<Real>>(&c)) out.push_back(*atom);
      if (const auto* family = std::get_if<AtomFamily<Real>>(&c))
        out.insert(out.end(), family->atoms.begin(), family->atoms.end());
    }
    return out;
  }

  bool atoms_only() const {
    for (const auto& c : components_)
      if (std::holds_alternative<CircleUniform<Real>>(c) || std::holds_alternative<RadialPower<Real>>(c)) return false;
    return true;
  }

  Measure with_component(MeasureComponent<Real> component) const {
    auto components = components_;
    components.push_back(std::move(component));
    return Measure(std::move(components));
  }

  /// t * mu for t >= 0.
  Measure scaled(Real t) const {
    if (!(t >= Real(0))) throw InvalidInstance("measure scale factor must be nonnegative");
    auto components = components_;
    for (auto& c : components) {
      std::visit(
          [t](auto& comp) {
            using T = std::decay_t<decltype(comp)>;
            if constexpr (std::is_same_v<T, Atom<Real>> || std::is_same_v<T, CircleUniform<Real>>) {
              comp.w *= t;
            } else if constexpr (std::is_same_v<T, AtomFamily<Real>>) {
              for (auto& atom : comp.atoms) atom.w *= t;
            } else {
              comp.c *= t;
            }
          },
          c);
    }
    return Measure(std::move(components));
  }

  Real total_mass() const {
    std::vector<Real> terms;
    for (const auto& c : components_) {
      std::visit(
          [&terms](const auto& comp) {
            using T = std::decay_t<decltype(comp)>;
            if constexpr (std::is_same_v<T, Atom<Real>> || std::is_same_v<T, CircleUniform<Real>>) {
              terms.push_back(comp.w);
            } else if constexpr (std::is_same_v<T, AtomFamily<Real>>) {
              for (const auto& atom : comp.atoms) terms.push_back(atom.w);
            } else {
              terms.push_back(comp.c == Real(0) ? Real(0) : comp.c * detail::power_integral(comp.alpha, comp.a, comp.b));
            }
          },
          c);
    }
    return pairwise_sum(terms);
  }

  /// Rejects atoms placed exactly on a node (mu(Gamma) = 0 is required).
  void validate_against(const SpacePair<Real>& space) const {
    for (const auto& atom : atoms()) {
      if (auto n = space.node_at(atom.z))
        throw PointOnGamma("measure atom lies on node " + std::to_string(*n + 1));
    }
  }

  /// Largest annulus index carrying positive mass; empty for the zero measure.
  std::optional<Index> last_charged_annulus(const AnnulusPartition<Real>& partition) const {
    std::optional<Index> last;
    auto bump = [&last](Index n) {
      if (!last || n > *last) last = n;
    };
    for (const auto& c : components_) {
      std::visit(
          [&](const auto& comp) {
            using T = std::decay_t<decltype(comp)>;
            if constexpr (std::is_same_v<T, Atom<Real>>) {
              if (comp.w > Real(0)) bump(annulus_of(partition, comp.z));
            } else if constexpr (std::is_same_v<T, AtomFamily<Real>>) {
              for (const auto& atom : comp.atoms)
                if (atom.w > Real(0)) bump(annulus_of(partition, atom.z));
            } else if constexpr (std::is_same_v<T, CircleUniform<Real>>) {
              if (comp.w > Real(0)) bump(partition.index_of_modulus(comp.r));
            } else {
              if (comp.c > Real(0)) bump(partition.index_of_modulus(comp.b));
            }
          },
          c);
    }
    return last;
  }

 private:
  std::vector<MeasureComponent<Real>> components_;
};

namespace detail {

/// Visits every component's contribution to annulus n; atom families are
/// unrolled so that each atom is one term.
template <typename Real, typename AtomTerm, typename CircleTerm, typename RadialTerm>
Real annulus_integral(const Measure<Real>& measure, const AnnulusPartition<Real>& partition, Index n,
                      AtomTerm&& atom_term, CircleTerm&& circle_term, RadialTerm&& radial_term) {
  std::vector<Real> terms;
  auto add_atom = [&](const Atom<Real>& atom) {
    if (atom.w > Real(0) && annulus_of(partition, atom.z) == n) terms.push_back(atom_term(atom));
  };
  for (const auto& c : measure.components()) {
    std::visit(
        [&](const auto& comp) {
          using T = std::decay_t<decltype(comp)>;
          if constexpr (std::is_same_v<T, Atom<Real>>) {
            add_atom(comp);
          } else if constexpr (std::is_same_v<T, AtomFamily<Real>>) {
            for (const auto& atom : comp.atoms) add_atom(atom);
          } else if constexpr (std::is_same_v<T, CircleUniform<Real>>) {
            if (comp.w > Real(0) && partition.index_of_modulus(comp.r) == n) terms.push_back(circle_term(comp));
          } else {
            if (comp.c > Real(0)) {
              const auto [lo, hi] = clip(comp, partition, n);
              if (lo < hi) terms.push_back(radial_term(comp, lo, hi));
            }
          }
        },
        c);
  }
  return pairwise_sum(terms);
}

}  // namespace detail

/// mu(Omega_n).
template <typename Real>
Real mass(const Measure<Real>& measure, const AnnulusPartition<Real>& partition, Index n,
          Diagnostics* diagnostics = nullptr) {
  return detail::annulus_integral(
      measure, partition, n, [](const Atom<Real>& a) { return a.w; },
      [](const CircleUniform<Real>& c) { return c.w; },
      [&](const RadialPower<Real>& r, Real lo, Real hi) {
        const Real value = r.c * detail::power_integral(r.alpha, lo, hi);
        if (diagnostics && !(value < detail::infinity<Real>()))
          diagnostics->note("radial mass diverges at the origin (alpha <= -1)");
        return value;
      });
}

/// tau_n^2 = integral over Omega_n of d mu / |z|^2.
template <typename Real>
Real int_inv_sq_modulus(const Measure<Real>& measure, const AnnulusPartition<Real>& partition, Index n,
                        Diagnostics* diagnostics = nullptr) {
  return detail::annulus_integral(
      measure, partition, n,
      [&](const Atom<Real>& a) {
        const Real m2 = std::norm(a.z);
        if (m2 == Real(0)) {
          if (diagnostics) diagnostics->note("atom at the origin makes the 1/|z|^2 integral infinite");
          return detail::infinity<Real>();
        }
        return a.w / m2;
      },
      [&](const CircleUniform<Real>& c) {
        if (c.r == Real(0)) {
          if (diagnostics) diagnostics->note("circle of radius 0 makes the 1/|z|^2 integral infinite");
          return detail::infinity<Real>();
        }
        return c.w / (c.r * c.r);
      },
      [&](const RadialPower<Real>& r, Real lo, Real hi) {
        const Real value = r.c * detail::power_integral(r.alpha - Real(2), lo, hi);
        if (diagnostics && !(value < detail::infinity<Real>()))
          diagnostics->note("radial 1/|z|^2 integral diverges at the origin (alpha <= 1)");
        return value;
      });
}

/// integral over [lo, hi] of r^alpha / |r^2 - rho^2| dr, times c. +inf when the
/// pole rho lies in the closed range.
template <typename Real>
Real radial_inv_sq_dist(const RadialPower<Real>& radial, Real lo, Real hi, Real rho,
                        Diagnostics* diagnostics = nullptr, const QuadratureOptions& base = {}) {
  using std::abs;
  using std::pow;
  if (radial.c == Real(0) || !(lo < hi)) return Real(0);
  if (rho == Real(0)) {
    const Real value = radial.c * detail::power_integral(radial.alpha - Real(2), lo, hi);
    if (diagnostics && !(value < detail::infinity<Real>()))
      diagnostics->note("radial density reaches the node at the origin");
    return value;
  }
  if (lo <= rho && rho <= hi) {
    if (diagnostics) diagnostics->note("radial density passes through a node circle (non-integrable pole)");
    return detail::infinity<Real>();
  }
  if (lo == Real(0) && radial.alpha <= Real(-1)) {
    if (diagnostics) diagnostics->note("radial density is not integrable at the origin");
    return detail::infinity<Real>();
  }
  QuadratureOptions options = base;
  const Real length = hi - lo;
  options.grade_left = (lo == Real(0) && radial.alpha < Real(0)) || (rho < lo && lo - rho < length);
  options.grade_right = rho > hi && rho - hi < length;
  const Real alpha = radial.alpha;
  auto integrand = [alpha, rho](Real r) { return pow(r, alpha) / abs((r - rho) * (r + rho)); };
  const auto result = integrate(integrand, lo, hi, options);
  if (!result.converged) {
    if (diagnostics) {
      diagnostics->note("radial quadrature hit the panel cap; integral reported as +inf");
      diagnostics->quadrature_failed = true;
    }
    return detail::infinity<Real>();
  }
  return radial.c * result.value;
}

/// integral over Omega_n of d mu / |z - gamma|^2. Circles use the mean of
/// 1/|z - gamma|^2 over |z| = r, which is 1/|r^2 - |gamma|^2|.
template <typename Real>
Real int_inv_sq_dist(const Measure<Real>& measure, const AnnulusPartition<Real>& partition, Index n,
                     const Complex<Real>& gamma, Diagnostics* diagnostics = nullptr) {
  const Real rho = modulus(gamma);
  return detail::annulus_integral(
      measure, partition, n,
      [&](const Atom<Real>& a) {
        const Real d2 = std::norm(a.z - gamma);
        if (d2 == Real(0)) {
          if (diagnostics) diagnostics->note("atom coincides with the pole");
          return detail::infinity<Real>();
        }
        return a.w / d2;
      },
      [&](const CircleUniform<Real>& c) {
        using std::abs;
        if (c.r == rho) {
          if (diagnostics) diagnostics->note("uniform circle passes through a node (non-integrable pole)");
          return detail::infinity<Real>();
        }
        return c.w / abs((c.r - rho) * (c.r + rho));
      },
      [&](const RadialPower<Real>& r, Real lo, Real hi) { return radial_inv_sq_dist(r, lo, hi, rho, diagnostics); });
}

/// Replaces every continuous component by an atom cloud: circles by K equally
/// spaced atoms, radial densities by a K-point Gauss-Legendre rule in r times K
/// equally spaced angles. Atoms pass through unchanged.
template <typename Real>
Measure<Real> discretize(const Measure<Real>& measure, int resolution) {
  using std::acos;
  using std::pow;
  if (resolution < 8) throw InvalidInstance("discretization resolution must be at least 8");
  const Real two_pi = Real(2) * acos(Real(-1));
  const Real k = Real(resolution);
  std::vector<MeasureComponent<Real>> out;
  for (const auto& c : measure.components()) {
    if (const auto* circle = std::get_if<CircleUniform<Real>>(&c)) {
      for (int j = 0; j < resolution; ++j)
        out.emplace_back(Atom<Real>{std::polar(circle->r, two_pi * Real(j) / k), circle->w / k});
    } else if (const auto* radial = std::get_if<RadialPower<Real>>(&c)) {
      if (radial->c == Real(0)) continue;
      const GaussLegendreRule<Real> rule(resolution);
      const Real mid = (radial->a + radial->b) / Real(2);
      const Real half = (radial->b - radial->a) / Real(2);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const Real r = mid + half * rule.nodes[i];
        const Real w = radial->c * pow(r, radial->alpha) * rule.weights[i] * half / k;
        for (int j = 0; j < resolution; ++j) out.emplace_back(Atom<Real>{std::polar(r, two_pi * Real(j) / k), w});
      }
    } else {
      out.push_back(c);
    }
  }
  return Measure<Real>(std::move(out));
}

}  // namespace carleson
