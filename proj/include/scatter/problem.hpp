// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_PROBLEM_HPP
#define SCATTER_PROBLEM_HPP

#include "scatter/analytic.hpp"
#include "scatter/common.hpp"

namespace scatter {

/// Benchmark boundary conditions: sound-hard (rigid), ASI with traction-free
/// inner surface, full two-sided ASI, and the manufactured pulsation field.
enum class BoundaryKind { SHBC, SSBC, NNBC, Manufactured };

struct ScatterProblem {
  double k = 1.0;
  Complex P_inc = 1.0;
  Vec3 d_s = Vec3(1, 0, 0);  // unit direction of incidence
  BoundaryKind kind = BoundaryKind::SHBC;
  analytic::MaterialParams mat;  // used by SSBC/NNBC
  Vec3 source = Vec3(0, 0, 0);   // manufactured source point y

  double omega() const { return k * mat.c_f; }

  /// d_s from aspect/elevation angles: d_s = -(cos b cos a, cos b sin a, sin b).
  static Vec3 incidence_from_angles(double alpha_rad, double beta_rad);
};

inline Vec3 ScatterProblem::incidence_from_angles(double a, double b) {
  return Vec3(-std::cos(b) * std::cos(a), -std::cos(b) * std::sin(a),
              -std::sin(b));
}

}  // namespace scatter

#endif
