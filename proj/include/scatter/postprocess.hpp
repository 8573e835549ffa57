// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_POSTPROCESS_HPP
#define SCATTER_POSTPROCESS_HPP

#include <functional>

#include "scatter/analytic.hpp"
#include "scatter/assembly.hpp"
#include "scatter/nurbs.hpp"

namespace scatter::post {

using ExactField = std::function<analytic::FieldValue(const Vec3&)>;

double target_strength(Complex p0, Complex P_inc);

/// I_SAV = (L_Gamma_a / 2) |Gamma_1| / |Omega_a|.
double sav_index(double L_gamma_a, double area_gamma1, double vol_omega_a);

// ----------------------------------------------------------- field evaluation

/// Discrete scalar field over a fluid patch (coefficients on glued dofs).
struct DiscreteField {
  const nurbs::NurbsPatch* patch;
  const nurbs::MeshTopology* topo;
  Eigen::VectorXcd coeffs;

  analytic::FieldValue eval_param(double xi, double eta, double zeta) const;
};

// ------------------------------------------------------------------- norms

/// ||p_h||_E^2 = int |grad p_h|^2 + k^2 |p_h|^2 over the patch.
double energy_norm_fluid(const nurbs::NurbsPatch& patch,
                         const nurbs::MeshTopology& topo,
                         const Eigen::VectorXcd& coeffs, double k, int nq = 0);

/// Energy norm of the exact field by the same quadrature pipeline.
double energy_norm_fluid_exact(const nurbs::NurbsPatch& patch,
                               const nurbs::MeshTopology& topo,
                               const ExactField& exact, double k, int nq = 0);

struct RelErrors {
  double energy_rel = 0.0;
  double h1_rel = 0.0;
  double energy_exact = 0.0;  // norm of the exact field
  double h1_exact = 0.0;
};

/// Relative energy and H1 errors of a discrete solution against an exact
/// field, integrated over Omega_a (the infinite-element tail is excluded).
RelErrors fluid_relative_errors(const nurbs::NurbsPatch& patch,
                                const nurbs::MeshTopology& topo,
                                const Eigen::VectorXcd& coeffs,
                                const ExactField& exact, double k, int nq = 0);

/// ||u||_E^2 = int u_(i,j) c_ijkl conj(u_(k,l)) + rho_s omega^2 |u|^2;
/// coefficients interleaved (3*basis + component).
double energy_norm_solid(const nurbs::NurbsPatch& patch,
                         const nurbs::MeshTopology& topo,
                         const Eigen::VectorXcd& coeffs3,
                         const analytic::MaterialParams& mat, double omega,
                         int nq = 0);

/// Coupled energy norm: sqrt(sum of squared parts with the 1/(rho_f omega^2)
/// fluid weights).
double energy_norm_coupled(double fluid_ext, double solid, double fluid_int,
                           double rho_f, double omega);

// -------------------------------------------------------- Kirchhoff integral

/// Surface data on Gamma_1 for the integral representation: the scattered
/// pressure trace and its normal derivative (n_sc points into the fluid).
struct KirchhoffData {
  std::function<Complex(const assembly::FacePoint&)> p;
  std::function<Complex(const assembly::FacePoint&, const Vec3&)> dpdn;
};

/// Near-field integral representation; x strictly outside Gamma_1.
Complex kirchhoff_near(const nurbs::NurbsPatch& patch,
                       const nurbs::MeshTopology& topo, int face, double k,
                       const KirchhoffData& data, const Vec3& x, int nq = 0);

/// Far-field pattern p0(xhat) from the same traces.
Complex kirchhoff_far(const nurbs::NurbsPatch& patch,
                      const nurbs::MeshTopology& topo, int face, double k,
                      const KirchhoffData& data, const Vec3& xhat, int nq = 0);

/// Traces of an analytic field (scattered part) on the surface.
KirchhoffData analytic_traces(const ExactField& field);

/// Traces of a discrete fluid solution; the normal derivative is the
/// physical gradient of the discrete field.
KirchhoffData discrete_traces(const DiscreteField& field);

// ----------------------------------------------------- best approximation

/// H1(Omega_a) projection of an exact field onto the discrete space:
/// (p_ba, q)_H1 = (p, q)_H1 for all discrete q. The Gram matrix is SPD and
/// factored by sparse Cholesky.
Eigen::VectorXcd best_approximation(const nurbs::NurbsPatch& patch,
                                    const nurbs::MeshTopology& topo,
                                    const ExactField& exact, int nq = 0);

}  // namespace scatter::post

#endif
