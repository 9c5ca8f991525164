#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "carleson/carleson.hpp"

namespace carleson::testing {

using Cd = std::complex<double>;

/// gamma_n = base^n, v_n = weight(n) for n = 1..N.
template <typename Real = double, typename WeightFn>
SpacePair<Real> geometric_space(Real base, Index size, WeightFn weight) {
  ComplexVector<Real> gamma(size);
  RealVector<Real> v(size);
  Real power = Real(1);
  for (Index n = 0; n < size; ++n) {
    power *= base;
    gamma[n] = Complex<Real>(power);
    v[n] = weight(n + 1);
  }
  return SpacePair<Real>(GammaSequence<Real>(gamma), WeightSequence<Real>(v));
}

/// Gamma_n = 2^n with unit weights.
template <typename Real = double>
SpacePair<Real> s1_space(Index size = 40) {
  return geometric_space<Real>(Real(2), size, [](Index) { return Real(1); });
}

/// Atoms z = 2^n + 1 with weight w(n), n = lo..hi.
inline Measure<double> shifted_atoms(long lo, long hi, double (*w)(long)) {
  return Measure<double>({AtomFamily<double>::generate(lo, hi, [w](long n) {
    return Atom<double>{Cd(std::ldexp(1.0, static_cast<int>(n)) + 1.0, 0.0), w(n)};
  })});
}

inline double unit_weight(long) { return 1.0; }
inline double quarter_power(long n) { return std::ldexp(1.0, -2 * static_cast<int>(n)); }

inline double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace carleson::testing
