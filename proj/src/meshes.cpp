// SPDX-License-Identifier: Apache-2.0
#include "scatter/meshes.hpp"

#include <cmath>

namespace scatter::meshes {

using nurbs::KnotVector;
using nurbs::NurbsPatch;

Family family_from_string(const std::string& s) {
  if (s == "iga" || s == "iga-max") return Family::IgaMax;
  if (s == "iga-c0") return Family::IgaC0;
  if (s == "fem-iso") return Family::FemIso;
  throw DomainError("unknown mesh family: " + s);
}

namespace {

// s-1 uniform subdivision knots per nonzero span, each with multiplicity mult
std::vector<double> subdivision_knots(const KnotVector& kv, int splits,
                                      int mult) {
  std::vector<double> out;
  if (splits < 2) return out;
  for (int span : kv.nonzero_spans()) {
    const double a = kv.knots[span], b = kv.knots[span + 1];
    for (int j = 1; j < splits; ++j)
      for (int m = 0; m < mult; ++m)
        out.push_back(a + (b - a) * j / static_cast<double>(splits));
  }
  return out;
}

NurbsPatch base_shell(double R_in, double R_out, bool degenerate_inner) {
  return degenerate_inner ? nurbs::make_sphere(R_out)
                          : nurbs::make_spherical_shell(R_in, R_out);
}

// degree-1 isoparametric mesh by interpolation on the refined knot grid
NurbsPatch linear_mesh(const NurbsPatch& base, int sx, int se, int sz) {
  std::array<KnotVector, 3> target;
  const int splits[3] = {sx, se, sz};
  for (int d = 0; d < 3; ++d) {
    KnotVector kv;
    kv.degree = 1;
    kv.knots.push_back(base.kv[d].front());
    kv.knots.push_back(base.kv[d].front());
    for (int span : base.kv[d].nonzero_spans()) {
      const double a = base.kv[d].knots[span], b = base.kv[d].knots[span + 1];
      for (int j = 1; j <= splits[d]; ++j)
        kv.knots.push_back(a + (b - a) * j / static_cast<double>(splits[d]));
    }
    kv.knots.push_back(base.kv[d].back());
    target[d] = kv;
    target[d].validate();
  }
  return interpolate_to_space(base, target);
}

}  // namespace

NurbsPatch refine_shell_mesh(double R_in, double R_out, bool degenerate_inner,
                             int degree, int sx, int se, int sz, int mult,
                             bool bspline_geometry) {
  NurbsPatch p = base_shell(R_in, R_out, degenerate_inner);
  if (degree == 1) return linear_mesh(p, sx, se, sz);
  if (degree < 2) throw DomainError("refine_shell_mesh: degree must be >= 1");

  p = nurbs::elevate_degree(p, 0, degree - 2);
  p = nurbs::elevate_degree(p, 1, degree - 2);
  p = nurbs::elevate_degree(p, 2, degree - 1);
  const int splits[3] = {sx, se, sz};
  for (int d = 0; d < 3; ++d) {
    const auto knots = subdivision_knots(p.kv[d], splits[d], mult);
    if (!knots.empty()) p = nurbs::insert_knots(p, d, knots);
  }
  if (bspline_geometry) p = nurbs::nurbs_to_bspline(p);
  return p;
}

NurbsPatch build_shell_mesh(double R_in, double R_out, bool degenerate_inner,
                            const MeshSpec& spec) {
  if (spec.level < 1) throw DomainError("build_shell_mesh: level must be >= 1");
  const int q_ang = 1 << (spec.level - 1);
  const int q_rad = (spec.schedule == Schedule::Uniform)
                        ? q_ang
                        : (1 << std::max(0, spec.level - 4));
  const int mult = (spec.family == Family::IgaMax) ? 1 : spec.degree;
  const bool bsp = (spec.family == Family::FemIso);
  return refine_shell_mesh(R_in, R_out, degenerate_inner, spec.degree, q_ang,
                           q_ang, q_rad, mult, bsp);
}

}  // namespace scatter::meshes
