#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "carleson/summation.hpp"

namespace carleson {

/// Gauss-Legendre nodes and weights on [-1, 1].
template <typename Real>
struct GaussLegendreRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;

  explicit GaussLegendreRule(int order) : nodes(static_cast<std::size_t>(order)), weights(static_cast<std::size_t>(order)) {
    using std::abs;
    using std::acos;
    using std::cos;
    const Real pi = acos(Real(-1));
    const Real eps = std::numeric_limits<Real>::epsilon();
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
      Real x = cos(pi * (Real(i) + Real(0.75)) / (Real(order) + Real(0.5)));
      Real derivative = Real(0);
      for (int iter = 0; iter < 100; ++iter) {
        Real p0 = Real(1);
        Real p1 = x;
        for (int k = 2; k <= order; ++k) {
          const Real p2 = (Real(2 * k - 1) * x * p1 - Real(k - 1) * p0) / Real(k);
          p0 = p1;
          p1 = p2;
        }
        derivative = Real(order) * (x * p1 - p0) / (x * x - Real(1));
        const Real step = p1 / derivative;
        x -= step;
        if (abs(step) <= Real(4) * eps * abs(x)) break;
      }
      // Refresh the derivative at the converged node.
      Real p0 = Real(1);
      Real p1 = x;
      for (int k = 2; k <= order; ++k) {
        const Real p2 = (Real(2 * k - 1) * x * p1 - Real(k - 1) * p0) / Real(k);
        p0 = p1;
        p1 = p2;
      }
      derivative = Real(order) * (x * p1 - p0) / (x * x - Real(1));
      const Real w = Real(2) / ((Real(1) - x * x) * derivative * derivative);
      const auto lo = static_cast<std::size_t>(i);
      const auto hi = static_cast<std::size_t>(order - 1 - i);
      nodes[lo] = -x;
      nodes[hi] = x;
      weights[lo] = w;
      weights[hi] = w;
    }
    if (order % 2 == 1) nodes[static_cast<std::size_t>(order / 2)] = Real(0);
  }

  /// Rule mapped onto [a, b].
  template <typename F>
  Real apply(F&& f, Real a, Real b) const {
    const Real mid = (a + b) / Real(2);
    const Real half = (b - a) / Real(2);
    std::vector<Real> terms(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) terms[i] = weights[i] * f(mid + half * nodes[i]);
    return half * pairwise_sum(terms);
  }
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  int max_panels = 10000;
  /// Geometric pre-refinement toward endpoints where the integrand is singular
  /// or nearly so.
  bool grade_left = false;
  bool grade_right = false;
  int grading_levels = 48;
};

template <typename Real>
struct QuadratureResult {
  Real value;
  Real error;
  int panels;
  bool converged;
};

/// Globally adaptive Gauss-Legendre quadrature over a finite interval.
///
/// Each panel is estimated with a 15-point rule and with the same rule on its
/// two halves; the difference is the error estimate. The panel with the
/// largest estimate is bisected until the total estimate meets rel_tol or the
/// panel cap is reached.
template <typename Real, typename F>
QuadratureResult<Real> integrate(F&& f, Real a, Real b, const QuadratureOptions& options = {}) {
  using std::abs;
  static const GaussLegendreRule<Real> rule(15);
  if (!(a < b)) return {Real(0), Real(0), 0, true};

  struct Panel {
    Real a, b, value, error;
  };
  auto make_panel = [&](Real lo, Real hi) {
    const Real mid = (lo + hi) / Real(2);
    const Real coarse = rule.apply(f, lo, hi);
    const Real fine = rule.apply(f, lo, mid) + rule.apply(f, mid, hi);
    return Panel{lo, hi, fine, abs(fine - coarse)};
  };
  auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> queue(worse);

  std::vector<Real> cuts{a, b};
  const Real length = b - a;
  for (int k = 1; k <= options.grading_levels; ++k) {
    const Real offset = length * std::ldexp(1.0, -k);
    if (options.grade_left) cuts.push_back(a + offset);
    if (options.grade_right) cuts.push_back(b - offset);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Real total = Real(0);
  Real total_error = Real(0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = make_panel(cuts[i], cuts[i + 1]);
    total += p.value;
    total_error += p.error;
    queue.push(p);
  }

  auto finish = [&](bool converged) {
    std::vector<Panel> panels;
    panels.reserve(queue.size());
    while (!queue.empty()) {
      panels.push_back(queue.top());
      queue.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    std::vector<Real> values(panels.size());
    std::vector<Real> errors(panels.size());
    for (std::size_t i = 0; i < panels.size(); ++i) {
      values[i] = panels[i].value;
      errors[i] = panels[i].error;
    }
    return QuadratureResult<Real>{pairwise_sum(values), pairwise_sum(errors), static_cast<int>(panels.size()),
                                  converged};
  };

  const Real tol = Real(options.rel_tol);
  while (true) {
    if (total_error <= tol * abs(total)) {
      // Recompute to shed drift in the running sums before accepting.
      total = Real(0);
      total_error = Real(0);
      std::vector<Panel> panels;
      while (!queue.empty()) {
        panels.push_back(queue.top());
        queue.pop();
      }
      for (const auto& p : panels) {
        total += p.value;
        total_error += p.error;
        queue.push(p);
      }
      if (total_error <= tol * abs(total)) return finish(true);
    }
    if (static_cast<int>(queue.size()) >= options.max_panels) return finish(false);
    const Panel worst = queue.top();
    queue.pop();
    const Real mid = (worst.a + worst.b) / Real(2);
    if (!(worst.a < mid && mid < worst.b)) {
      // Interval exhausted at working precision.
      queue.push(worst);
      return finish(false);
    }
    const Panel left = make_panel(worst.a, mid);
    const Panel right = make_panel(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
}

}  // namespace carleson
