// SPDX-License-Identifier: Apache-2.0
#include "scatter/coords.hpp"

#include <algorithm>
#include <cmath>

namespace scatter::coords {

Vec3 to_cartesian(const ProlateSystem& sys, const ProlatePoint& p) {
  const double ups = sys.upsilon;
  const double rad = std::sqrt(std::max(0.0, p.r * p.r - ups * ups));
  const double st = std::sin(p.theta);
  return {rad * st * std::cos(p.phi), rad * st * std::sin(p.phi),
          p.r * std::cos(p.theta)};
}

ProlatePoint from_cartesian(const ProlateSystem& sys, const Vec3& x) {
  const double ups = sys.upsilon;
  const double rho2 = x[0] * x[0] + x[1] * x[1];
  const double d1 = std::sqrt(rho2 + (x[2] + ups) * (x[2] + ups));
  const double d2 = std::sqrt(rho2 + (x[2] - ups) * (x[2] - ups));
  const double r = 0.5 * (d1 + d2);
  if (rho2 == 0.0 && std::abs(x[2]) < ups)
    throw DomainError("from_cartesian: azimuth undefined on the focal segment");
  double ct = (r > 0.0) ? x[2] / r : 1.0;
  ct = std::clamp(ct, -1.0, 1.0);
  const double theta = std::acos(ct);
  double phi = (rho2 == 0.0) ? 0.0 : std::atan2(x[1], x[0]);
  if (phi < 0.0) phi += 2.0 * PI;
  return {r, theta, phi};
}

Metric metric(const ProlateSystem& sys, const ProlatePoint& p) {
  const double ups = sys.upsilon;
  const double r2 = p.r * p.r;
  const double u2 = ups * ups;
  if (!(r2 > u2)) throw SingularityError("metric: r <= Upsilon is singular");
  const double ct = std::cos(p.theta);
  const double st = std::sin(p.theta);
  const double a = r2 - u2 * ct * ct;  // r^2 - Ups^2 cos^2 th
  const double b = r2 - u2;
  Metric m;
  m.h_r = std::sqrt(a / b);
  m.h_theta = std::sqrt(a);
  m.h_phi = std::sqrt(b) * st;
  m.J1 = a * st;
  return m;
}

double surface_jacobian(const ProlateSystem& sys, double r, double theta) {
  const double u2 = sys.upsilon * sys.upsilon;
  const double ct = std::cos(theta);
  return std::sqrt(r * r - u2 * ct * ct) * std::sqrt(r * r - u2) *
         std::sin(theta);
}

Eigen::Matrix3d dprolate_dcartesian(const ProlateSystem& sys, const Vec3& x) {
  const double ups = sys.upsilon;
  const double rho2 = x[0] * x[0] + x[1] * x[1];
  const double d1 = std::sqrt(rho2 + (x[2] + ups) * (x[2] + ups));
  const double d2 = std::sqrt(rho2 + (x[2] - ups) * (x[2] - ups));
  const double dsum = d1 + d2;
  const double dprod = d1 * d2;
  const double r = 0.5 * dsum;
  if (dprod <= 0.0)
    throw SingularityError("dprolate_dcartesian: point at a focus");
  const double rz = std::sqrt(std::max(0.0, r * r - x[2] * x[2]));  // r sin th
  if (rho2 == 0.0 || rz == 0.0)
    throw SingularityError("dprolate_dcartesian: derivative singular on axis");

  Eigen::Matrix3d J;
  J(0, 0) = x[0] * dsum / (2.0 * dprod);
  J(0, 1) = x[1] * dsum / (2.0 * dprod);
  J(0, 2) = (x[2] * dsum + ups * (d2 - d1)) / (2.0 * dprod);

  J(1, 0) = x[0] * x[2] / (dprod * rz);
  J(1, 1) = x[1] * x[2] / (dprod * rz);
  J(1, 2) = (x[2] * x[2] / dprod + ups * x[2] * (d2 - d1) / (dprod * dsum) - 1.0) / rz;

  J(2, 0) = -x[1] / rho2;
  J(2, 1) = x[0] / rho2;
  J(2, 2) = 0.0;
  return J;
}

AngularJacobian angular_param_jacobian(const ProlateSystem& sys, const Vec3& x,
                                       const Vec3& dx_dxi, const Vec3& dx_deta) {
  const Eigen::Matrix3d dP = dprolate_dcartesian(sys, x);
  Eigen::Matrix<double, 3, 2> T;
  T.col(0) = dx_dxi;
  T.col(1) = dx_deta;
  const Eigen::Matrix<double, 2, 3> dAng = dP.bottomRows<2>();
  AngularJacobian out;
  out.J3 = dAng * T;
  out.det = out.J3.determinant();
  if (!std::isfinite(out.det) || std::abs(out.det) < 1e-14)
    throw SingularityError("angular_param_jacobian: degenerate parametrization");
  Eigen::Matrix2d inv;
  inv << out.J3(1, 1), -out.J3(0, 1), -out.J3(1, 0), out.J3(0, 0);
  inv /= out.det;
  out.J3_invT = inv.transpose();
  return out;
}

}  // namespace scatter::coords
