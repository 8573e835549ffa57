// SPDX-License-Identifier: Apache-2.0
#include "scatter/quadrature.hpp"

#include <cmath>

#include "scatter/specfun.hpp"

namespace scatter::assembly {

QuadratureRule gauss_rule(int n_pts) {
  if (n_pts < 1) throw DomainError("gauss_rule: need at least one point");
  QuadratureRule rule;
  rule.points.resize(n_pts);
  rule.weights.resize(n_pts);
  for (int i = 0; i < n_pts; ++i) {
    double x = std::cos(PI * (i + 0.75) / (n_pts + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto ev = specfun::legendre_p(n_pts, x);
      const double dx = ev.value / ev.deriv;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const auto ev = specfun::legendre_p(n_pts, x);
    rule.points[n_pts - 1 - i] = x;
    rule.weights[n_pts - 1 - i] = 2.0 / ((1.0 - x * x) * ev.deriv * ev.deriv);
  }
  return rule;
}

}  // namespace scatter::assembly
