// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_QUADRATURE_HPP
#define SCATTER_QUADRATURE_HPP

#include <vector>

#include "scatter/common.hpp"

namespace scatter::assembly {

/// Gauss-Legendre rule on [-1,1]; exact for polynomials of degree 2n-1.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

QuadratureRule gauss_rule(int n_pts);

}  // namespace scatter::assembly

#endif
