// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_COORDS_HPP
#define SCATTER_COORDS_HPP

#include "scatter/common.hpp"

namespace scatter::coords {

/// Prolate spheroidal coordinate system with foci at z = +-Upsilon.
/// Upsilon = 0 degenerates to spherical coordinates.
struct ProlateSystem {
  double upsilon = 0.0;
};

/// r >= Upsilon, theta in [0,pi], phi in [0,2pi).
struct ProlatePoint {
  double r;
  double theta;
  double phi;
};

Vec3 to_cartesian(const ProlateSystem& sys, const ProlatePoint& p);

/// Inverse map using the numerically stable focal-distance form
/// r = (d1 + d2)/2. Azimuth at the poles is defined as phi = 0.
/// Throws DomainError on the open focal segment (x = y = 0, |z| < Upsilon)
/// where the azimuth is undefined.
ProlatePoint from_cartesian(const ProlateSystem& sys, const Vec3& x);

struct Metric {
  double h_r;
  double h_theta;
  double h_phi;
  double J1;  // (r^2 - Ups^2 cos^2 theta) sin theta
};

/// Scale factors and volume Jacobian; requires r > Upsilon.
Metric metric(const ProlateSystem& sys, const ProlatePoint& p);

/// J_S = sqrt(r^2 - Ups^2 cos^2 th) sqrt(r^2 - Ups^2) sin th at constant r.
double surface_jacobian(const ProlateSystem& sys, double r, double theta);

/// Rows are d(r, theta, phi)/d(x, y, z) evaluated at the Cartesian point x.
Eigen::Matrix3d dprolate_dcartesian(const ProlateSystem& sys, const Vec3& x);

struct AngularJacobian {
  Eigen::Matrix2d J3;       // [d theta/d(xi,eta); d phi/d(xi,eta)]
  Eigen::Matrix2d J3_invT;  // inverse transpose
  double det;
};

/// Jacobian of the (theta,phi) <- (xi,eta) reparametrization of a
/// constant-radius surface, composed from dprolate_dcartesian and the
/// surface tangents dx/dxi, dx/deta. Throws SingularityError when
/// |det J3| < 1e-14 (degenerate parametrization, e.g. at the poles).
AngularJacobian angular_param_jacobian(const ProlateSystem& sys, const Vec3& x,
                                       const Vec3& dx_dxi, const Vec3& dx_deta);

}  // namespace scatter::coords

#endif
