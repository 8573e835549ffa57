// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_ASSEMBLY_HPP
#define SCATTER_ASSEMBLY_HPP

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "scatter/coords.hpp"
#include "scatter/linalg.hpp"
#include "scatter/nurbs.hpp"
#include "scatter/problem.hpp"
#include "scatter/quadrature.hpp"
#include "scatter/specfun.hpp"

namespace scatter::assembly {

// ------------------------------------------------------------ infinite elements

enum class IeFormulation { PGU, PGC, BGU, BGC };
enum class RadialBasis { Lagrange, Chebyshev, Bernstein };

const char* to_string(IeFormulation f);
const char* to_string(RadialBasis b);
IeFormulation ie_formulation_from_string(const std::string& s);
RadialBasis radial_basis_from_string(const std::string& s);

/// Infinite-element configuration: radial shape functions
/// phi_m(r) = e^{ik(r-r_a)} Q_m(r_a/r) with Q_m(x) = sum_mt D[m][mt] x^mt,
/// and the test-side counterpart with coefficients D_tilde.
struct IeContext {
  IeFormulation formulation = IeFormulation::BGU;
  int N = 4;
  RadialBasis basis = RadialBasis::Lagrange;
  Eigen::MatrixXcd D;        // N x N, rows m, cols mt (monomial exponent)
  Eigen::MatrixXcd D_tilde;  // test side; equals D for Bubnov-Galerkin
  double r_a = 0.0;
  double upsilon = 0.0;
  double k = 0.0;
  std::vector<double> r_n;  // node radii (Lagrange)

  double rho1() const { return upsilon / r_a; }
  double rho2() const { return k * r_a; }
  double rho3() const { return k * upsilon; }
  bool conjugated() const {
    return formulation == IeFormulation::PGC || formulation == IeFormulation::BGC;
  }
  bool bubnov() const {
    return formulation == IeFormulation::BGU || formulation == IeFormulation::BGC;
  }
};

/// Builds D (trial) and D_tilde (test) for the chosen radial basis.
/// Lagrange uses node radii r_n (default n * r_a) and fails above condition
/// 1e14 of the node Vandermonde.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> radial_coefficients(
    IeFormulation f, RadialBasis basis, int N, double k, double r_a,
    std::vector<double> r_n = {});

IeContext make_ie_context(IeFormulation f, RadialBasis basis, int N, double k,
                          double r_a, double upsilon,
                          std::vector<double> r_n = {});

/// Radial integral table sized for the bilinear forms of this context
/// (n_max = 2N + 4) with the matching conjugation flag.
specfun::RadialIntegralTable radial_integrals_for(const IeContext& ie);

// ------------------------------------------------------------------- surfaces

struct FacePoint {
  double xi, eta;      // surface parameters
  Vec3 x;
  Vec3 t_xi, t_eta;   // surface tangents
  Vec3 normal_out;     // unit normal pointing out of the patch volume
  double dGamma;       // surface measure including quadrature weight
  const nurbs::BasisEval* ev;  // 3D basis evaluation at the face
  int elem;            // adjacent 3D element index
};

/// Iterates quadrature points of the zeta = 0 (face = 0) or zeta = 1
/// (face = 1) boundary face. nq = points per direction (0: degree+1).
void for_each_face_point(const nurbs::NurbsPatch& patch,
                         const nurbs::MeshTopology& topo, int face, int nq,
                         const std::function<void(const FacePoint&)>& fn,
                         bool with_phys_grads = false);

double face_area(const nurbs::NurbsPatch& patch, const nurbs::MeshTopology& topo,
                 int face, int nq = 0);
double patch_volume(const nurbs::NurbsPatch& patch,
                    const nurbs::MeshTopology& topo, int nq = 0);
/// Largest element diameter, estimated from physical corner distances.
double max_element_diameter(const nurbs::NurbsPatch& patch,
                            const nurbs::MeshTopology& topo);

// ------------------------------------------------------------------ operators

/// B_a(q,p) = int [grad q . grad p - k^2 q p]; symmetric.
la::ComplexTripletMatrix assemble_helmholtz(const nurbs::NurbsPatch& patch,
                                            const nurbs::MeshTopology& topo,
                                            double k, int nq = 0,
                                            int n_threads = 1);

/// int [v_(i,j) c_ijkl u_(k,l) - rho_s omega^2 u . v]; dofs interleaved
/// (3*basis + component); real symmetric.
la::ComplexTripletMatrix assemble_elasticity(const nurbs::NurbsPatch& patch,
                                             const nurbs::MeshTopology& topo,
                                             const analytic::MaterialParams& mat,
                                             double omega, int nq = 0,
                                             int n_threads = 1);

/// Surface mass coupling int R_I^fluid R_J^solid n_c dGamma over a shared
/// interface; rows fluid dofs, cols 3*solid+c. The normal points out of the
/// solid. Throws GeometryError if the face parametrizations differ.
la::ComplexTripletMatrix assemble_coupling(
    const nurbs::NurbsPatch& fluid, const nurbs::MeshTopology& fluid_topo,
    int fluid_face, const nurbs::NurbsPatch& solid,
    const nurbs::MeshTopology& solid_topo, int solid_face, int nq = 0);

/// L_I = int R_I g dGamma on a boundary face; g(x, n_sc) is the Neumann
/// datum with n_sc the unit normal pointing out of the scatterer (into the
/// exterior fluid).
Eigen::VectorXcd assemble_load(
    const nurbs::NurbsPatch& patch, const nurbs::MeshTopology& topo, int face,
    const std::function<Complex(const Vec3&, const Vec3&)>& g, int nq = 0);

/// Neumann datum of the given problem on the scatterer surface.
std::function<Complex(const Vec3&, const Vec3&)> neumann_datum(
    const ScatterProblem& problem);

/// Angular integrals over Gamma_a (zeta = 1 face), pulled back through the
/// prolate angular Jacobian:
///   A1 = R R sin, A2 = dth dth sin, A3 = dph dph / sin,
///   A4 = dph dph cos^2/sin, A5 = R R cos^2 sin.
struct AngularIntegrals {
  std::array<Eigen::SparseMatrix<double>, 5> A;
  int n = 0;  // |kappa_a|
};

AngularIntegrals assemble_angular_integrals(const nurbs::NurbsPatch& patch,
                                            const nurbs::MeshTopology& topo,
                                            const coords::ProlateSystem& sys,
                                            double r_a, int nq = 0);

/// Infinite-element closure matrix, placed at the global fluid/IE dof layout:
/// radial order 1 couples to the kappa_a fluid dofs, orders m >= 2 to
/// n_fluid + (m-2)|kappa_a| + itilde.
la::ComplexTripletMatrix assemble_infinite_elements(
    const AngularIntegrals& ang, const IeContext& ie,
    const specfun::RadialIntegralTable& rad, const std::vector<int>& kappa_a,
    int n_fluid);

// --------------------------------------------------------------- full system

struct DofLayout {
  int n_fluid = 0;    // |kappa| of the exterior fluid
  int n_kappa_a = 0;  // |kappa_a|
  int N = 0;          // radial orders in the infinite elements
  int n_solid = 0;    // solid basis count (dofs = 3x)
  int n_interior = 0; // interior fluid basis count (NNBC)

  int ie_offset() const { return n_fluid; }
  int n_ie() const { return n_kappa_a * std::max(N - 1, 0); }
  int solid_offset() const { return n_fluid + n_ie(); }
  int interior_offset() const { return solid_offset() + 3 * n_solid; }
  int total() const { return interior_offset() + n_interior; }
};

struct GeometryBundle {
  nurbs::NurbsPatch fluid;
  nurbs::MeshTopology fluid_topo;
  std::optional<nurbs::NurbsPatch> solid;
  std::optional<nurbs::MeshTopology> solid_topo;
  std::optional<nurbs::NurbsPatch> interior;
  std::optional<nurbs::MeshTopology> interior_topo;
  double r_a = 0.0;
  double upsilon = 0.0;
};

struct GlobalSystem {
  la::ComplexTripletMatrix A;
  Eigen::VectorXcd F;
  DofLayout layout;
};

struct AssemblyOptions {
  int nq = 0;             // quadrature points per direction (0: degree+1)
  int n_threads = 1;
  bool include_coupling = true;  // test hook for block-decoupling checks
};

/// Assembles the full discrete system for the given problem. Fluid-only
/// systems (SHBC, manufactured) are unscaled; ASI systems carry the
/// 1/(rho_f omega^2) fluid scaling of the coupled weak form.
GlobalSystem assemble_system(const ScatterProblem& problem,
                             const GeometryBundle& geom, const IeContext& ie,
                             const AssemblyOptions& opt = {});

}  // namespace scatter::assembly

#endif
