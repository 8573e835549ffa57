// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_NURBS_HPP
#define SCATTER_NURBS_HPP

#include <array>
#include <iosfwd>
#include <vector>

#include "scatter/common.hpp"

namespace scatter::nurbs {

/// Open knot vector with degree. Knots nondecreasing, end multiplicity
/// degree+1, interior multiplicities <= degree+1.
struct KnotVector {
  std::vector<double> knots;
  int degree = 0;

  int num_basis() const { return static_cast<int>(knots.size()) - degree - 1; }
  double front() const { return knots.front(); }
  double back() const { return knots.back(); }
  void validate() const;  // throws DomainError on malformed input

  /// Indices of knot spans with nonzero length (elements).
  std::vector<int> nonzero_spans() const;
};

/// 0-based span index i with knots[i] <= xi < knots[i+1]; at the last knot
/// the final nonzero span is returned. The MATLAB-style 1-based index used
/// in some references equals the returned value plus one.
int find_knot_span(const KnotVector& kv, double xi);

/// Values and first derivatives of the degree+1 B-spline basis functions
/// that are nonzero on the given span, evaluated at xi. N and dN must hold
/// degree+1 entries; entry a corresponds to global function span-degree+a.
void bspline_basis_ders(const KnotVector& kv, int span, double xi, double* N,
                        double* dN);

/// Greville abscissae (knot averages), one per basis function.
std::vector<double> greville_abscissae(const KnotVector& kv);

/// Trivariate NURBS patch. Control points stored xi-fastest:
/// index = i + n_xi * (j + n_eta * l).
struct NurbsPatch {
  std::array<KnotVector, 3> kv;
  std::vector<Vec3> cpts;
  std::vector<double> weights;

  int n(int dir) const { return kv[dir].num_basis(); }
  size_t cp_index(int i, int j, int l) const {
    return static_cast<size_t>(i) +
           static_cast<size_t>(n(0)) * (static_cast<size_t>(j) +
                                        static_cast<size_t>(n(1)) * l);
  }
  void validate() const;
  double bbox_diagonal() const;
};

/// Basis evaluation at a parametric point, with geometry quantities.
struct BasisEval {
  std::array<int, 3> span;
  std::vector<double> values;                 // n_en, xi-fastest local order
  std::vector<std::array<double, 3>> grads_param;
  std::vector<int> raw_indices;               // control-point indices
  Vec3 x;
  Eigen::Matrix3d jac;                        // columns d x / d (xi,eta,zeta)
  double detJ = 0.0;
  std::vector<std::array<double, 3>> grads_phys;  // filled iff with_phys
};

/// Evaluates the nonzero NURBS basis functions and geometry at (xi,eta,zeta).
/// with_phys additionally computes physical gradients; throws
/// SingularityError if |det J| < 1e-14 in that case.
BasisEval nurbs_basis_3d(const NurbsPatch& patch, double xi, double eta,
                         double zeta, bool with_phys = true);

/// Geometry-preserving knot insertion (Boehm) of the given knots into one
/// parametric direction. Values outside the knot range are rejected.
NurbsPatch insert_knots(const NurbsPatch& patch, int direction,
                        const std::vector<double>& new_knots);

/// Geometry-preserving degree elevation by `times` in one direction,
/// realized by interpolation in homogeneous coordinates on the elevated
/// space's Greville grid (the original lies exactly in that space).
NurbsPatch elevate_degree(const NurbsPatch& patch, int direction, int times);

/// B-spline (all weights 1) approximation interpolating the patch geometry
/// at the Greville grid of the patch's own knot vectors.
NurbsPatch nurbs_to_bspline(const NurbsPatch& patch);

/// As nurbs_to_bspline but interpolating on a caller-provided target space.
NurbsPatch interpolate_to_space(const NurbsPatch& patch,
                                const std::array<KnotVector, 3>& target);

NurbsPatch make_sphere(double R0);
NurbsPatch make_spherical_shell(double R1, double R0);
/// Fluid shell between the scatterer surface (zeta=0, radius R0) and the
/// artificial boundary (zeta=1, radius r_a).
NurbsPatch make_fluid_shell(double R0, double r_a);

/// Mesh/connectivity layer over a patch: elements from nonzero knot spans,
/// per-element global (glued) basis indices, and the Gamma_a index set.
struct MeshTopology {
  std::array<std::vector<int>, 3> spans;     // nonzero span indices per dir
  std::vector<std::vector<int>> connectivity;  // per element, glued dof ids
  std::vector<int> glue_map;      // raw cp -> parent raw cp (idempotent)
  std::vector<int> raw_to_glued;  // raw cp -> glued dof id in [0,n_glued)
  int n_glued = 0;                // |kappa|
  std::vector<int> kappa_a;       // glued dof ids nonzero on zeta=1 face
  std::vector<int> kappa_a_pos;   // glued dof -> position in kappa_a, or -1

  int num_elements() const { return static_cast<int>(connectivity.size()); }
  int num_elements_dir(int d) const { return static_cast<int>(spans[d].size()); }
  int element_index(int ia, int ib, int ic) const {
    return ia + num_elements_dir(0) * (ib + num_elements_dir(1) * ic);
  }
  /// Parametric box of element e as {lo, hi} per direction.
  std::array<std::array<double, 2>, 3> element_box(const NurbsPatch& patch,
                                                   int e) const;
};

MeshTopology build_topology(const NurbsPatch& patch, bool periodic);

void write_patch(std::ostream& os, const NurbsPatch& patch);
NurbsPatch read_patch(std::istream& is);

}  // namespace scatter::nurbs

#endif
