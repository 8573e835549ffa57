// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_ANALYTIC_HPP
#define SCATTER_ANALYTIC_HPP

#include <vector>

#include "scatter/common.hpp"

namespace scatter::analytic {

struct MaterialParams {
  double E = 0.0;      // Young's modulus [Pa]
  double nu = 0.0;     // Poisson's ratio
  double rho_s = 0.0;  // solid density [kg/m^3]
  double rho_f = 0.0;  // fluid density [kg/m^3]
  double c_f = 0.0;    // fluid sound speed [m/s]

  double lambda() const { return nu * E / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  double mu() const { return E / (2.0 * (1.0 + nu)); }
  double c1() const;  // longitudinal wave velocity
  double c2() const;  // shear wave velocity
  void validate() const;
};

/// Ihlenburg spherical-shell benchmark parameters.
MaterialParams ihlenburg_material();

struct SeriesControl {
  double rel_tol = 1e-10;
  int n_max = 200;
  int n_trunc = -1;  // >= 0: hard truncation at this mode
};

/// Scalar value and Cartesian gradient of a complex field.
struct FieldValue {
  Complex p;
  Eigen::Vector3cd grad;
};

/// Value and spherical-basis derivatives (d/dr, d/dtheta) of an
/// axisymmetric field, theta measured from the incidence axis.
struct SphericalFieldValue {
  Complex p;
  Complex dp_dr;
  Complex dp_dtheta;
};

// ---------------------------------------------------------------- rigid sphere

/// Scattered pressure for a plane wave hitting a rigid sphere of radius R,
/// incidence along +z, evaluated at (r, theta), r >= R.
SphericalFieldValue rigid_sphere_pressure(double k, Complex P_inc, double R,
                                          double r, double theta,
                                          const SeriesControl& ctl);

/// Far-field pattern p0(theta) = lim r e^{-ikr} p(r, theta).
Complex rigid_sphere_farfield(double k, Complex P_inc, double R, double theta,
                              const SeriesControl& ctl);

/// Direction-general evaluation (incidence d_s, |d_s| = 1).
class RigidSphereSolution {
public:
  RigidSphereSolution(double k, Complex P_inc, double R, Vec3 d_s,
                      SeriesControl ctl);
  FieldValue field(const Vec3& x) const;
  Complex farfield(const Vec3& xhat) const;
  double k() const { return k_; }

private:
  friend class ElasticShellSolution;
  Complex coef(int n) const;  // -P i^n (2n+1) j_n'(kR)/h_n'(kR)
  double k_, R_;
  Complex P_;
  Vec3 d_s_;
  SeriesControl ctl_;
  mutable std::vector<Complex> coef_;
};

// ------------------------------------------------------------- elastic shell

/// Per-mode impedances and displacement coefficients of the elastic
/// spherical shell (traction-free inner surface).
struct ShellMode {
  Complex z_n;             // specific acoustic impedance
  Complex Z_n;             // mechanical impedance
  Eigen::Vector4d C;       // C_n^(1..4)
  double det;              // 4x4 (or 2x2 for n=0) mode determinant
};

ShellMode shell_mode(const MaterialParams& mat, double k, double R1, double R0,
                     int n);

class ElasticShellSolution {
public:
  ElasticShellSolution(double k, Complex P_inc, double R1, double R0,
                       MaterialParams mat, Vec3 d_s, SeriesControl ctl);
  FieldValue field(const Vec3& x) const;
  Complex farfield(const Vec3& xhat) const;

private:
  Complex coef(int n) const;  // elastic correction coefficient
  RigidSphereSolution rigid_;
  double k_, R1_, R0_;
  Complex P_;
  MaterialParams mat_;
  Vec3 d_s_;
  SeriesControl ctl_;
  mutable std::vector<Complex> coef_;
};

SphericalFieldValue elastic_shell_pressure(double k, Complex P_inc, double R1,
                                           double R0, const MaterialParams& mat,
                                           double r, double theta,
                                           const SeriesControl& ctl);

// ------------------------------------------------------- manufactured field

/// Free-space Green's function pulse p = e^{ikR}/(4 pi R), R = |x - y|.
FieldValue manufactured_field(double k, const Vec3& y, const Vec3& x);

/// Far field (1/4pi) e^{-ik xhat . y}.
Complex manufactured_farfield(double k, const Vec3& y, const Vec3& xhat);

/// Neumann datum of the manufactured field on a surface with unit normal n:
/// grad p . n.
Complex manufactured_flux(double k, const Vec3& y, const Vec3& x, const Vec3& n);

}  // namespace scatter::analytic

#endif
