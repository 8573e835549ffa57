// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_MESHES_HPP
#define SCATTER_MESHES_HPP

#include <string>

#include "scatter/nurbs.hpp"

namespace scatter::meshes {

/// Mesh construction families for the benchmark studies: maximum-continuity
/// IGA, C0 IGA (knots repeated to multiplicity p), and the isoparametric
/// B-spline FEM surrogate (C0 + geometry interpolation, weights 1).
enum class Family { IgaMax, IgaC0, FemIso };

Family family_from_string(const std::string& s);

/// Refinement schedule: the shell convergence studies refine only the
/// angular directions for the first three levels to limit element aspect
/// ratio; Uniform halves h in every direction each level.
enum class Schedule { AngularFirst, Uniform };

struct MeshSpec {
  int degree = 2;
  int level = 1;  // m >= 1; level 1 is the coarsest mesh
  Family family = Family::IgaMax;
  Schedule schedule = Schedule::Uniform;
};

/// Shell-type benchmark mesh between two radii (degenerate_inner selects the
/// solid-sphere interior patch used for the NNBC interior fluid).
nurbs::NurbsPatch build_shell_mesh(double R_in, double R_out,
                                   bool degenerate_inner, const MeshSpec& spec);

/// Lower-level entry: explicit per-direction span splits, knot multiplicity
/// (1 = maximal continuity, degree = C0) and geometry family. Used by the
/// matched-dof continuity comparisons: a C0 mesh with q splits of
/// multiplicity p has the dof count of a maximal-continuity mesh with
/// p(q-1)+1 simple splits.
nurbs::NurbsPatch refine_shell_mesh(double R_in, double R_out,
                                    bool degenerate_inner, int degree, int sx,
                                    int se, int sz, int mult,
                                    bool bspline_geometry);

}  // namespace scatter::meshes

#endif
