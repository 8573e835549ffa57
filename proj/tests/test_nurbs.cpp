// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "scatter/nurbs.hpp"

using namespace scatter;
using namespace scatter::nurbs;

namespace {

std::vector<std::array<double, 3>> random_params(int count, uint64_t seed) {
  auto rng = oracles::make_rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<std::array<double, 3>> out(count);
  for (auto& p : out) p = {u01(rng), u01(rng), u01(rng)};
  return out;
}

std::array<double, 3> scale_params(const KnotVector& k0, const KnotVector& k1,
                                   const KnotVector& k2,
                                   const std::array<double, 3>& u) {
  return {k0.front() + u[0] * (k0.back() - k0.front()),
          k1.front() + u[1] * (k1.back() - k1.front()),
          k2.front() + u[2] * (k2.back() - k2.front())};
}

}  // namespace

TEST_CASE("knot span lookup matches the reference example") {
  // p = 2, Xi = {0,0,0,0.1,0.5,0.5,0.8,0.9,1,1,1}: the 1-based span indices
  // are 3, 6 and 8; find_knot_span is 0-based (value + 1 below).
  KnotVector kv{{0, 0, 0, 0.1, 0.5, 0.5, 0.8, 0.9, 1, 1, 1}, 2};
  kv.validate();
  CHECK(kv.num_basis() == 8);
  CHECK(find_knot_span(kv, 0.09) + 1 == 3);
  CHECK(find_knot_span(kv, 0.5) + 1 == 6);
  CHECK(find_knot_span(kv, 0.9) + 1 == 8);
  CHECK(find_knot_span(kv, 1.0) + 1 == 8);
  CHECK_THROWS_AS(find_knot_span(kv, 1.5), DomainError);
}

TEST_CASE("bspline basis values and derivatives") {
  KnotVector lin{{0, 0, 1, 1}, 1};
  double N[2], dN[2];
  bspline_basis_ders(lin, find_knot_span(lin, 0.25), 0.25, N, dN);
  CHECK(N[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(N[1] == doctest::Approx(0.25).epsilon(1e-15));

  KnotVector kv{{0, 0, 0, 0.1, 0.5, 0.5, 0.8, 0.9, 1, 1, 1}, 2};
  for (double xi : {0.05, 0.3, 0.47, 0.77, 0.95}) {
    const int span = find_knot_span(kv, xi);
    double v[3], d[3];
    bspline_basis_ders(kv, span, xi, v, d);
    CHECK(v[0] + v[1] + v[2] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(d[0] + d[1] + d[2] == doctest::Approx(0.0).epsilon(1e-10));
    // derivative vs central finite difference
    const double h = 1e-7;
    double vp[3], vm[3], dd[3];
    bspline_basis_ders(kv, find_knot_span(kv, xi + h), xi + h, vp, dd);
    bspline_basis_ders(kv, find_knot_span(kv, xi - h), xi - h, vm, dd);
    for (int a = 0; a < 3; ++a)
      CHECK(d[a] == doctest::Approx((vp[a] - vm[a]) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("greville abscissae") {
  KnotVector kv{{0, 0, 0, 1, 1, 1}, 2};
  auto g = greville_abscissae(kv);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(0.0));
  CHECK(g[1] == doctest::Approx(0.5));
  CHECK(g[2] == doctest::Approx(1.0));
  KnotVector kv2{{0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1}, 2};
  auto g2 = greville_abscissae(kv2);
  CHECK(static_cast<int>(g2.size()) == kv2.num_basis());
  CHECK(g2.front() == doctest::Approx(0.0));
  CHECK(g2.back() == doctest::Approx(1.0));
}

TEST_CASE("sphere and shell geometry is exact") {
  const double R0 = 5.075, R1 = 4.925;
  const NurbsPatch shell = make_spherical_shell(R1, R0);
  for (const auto& u : random_params(300, 42)) {
    const auto p = scale_params(shell.kv[0], shell.kv[1], shell.kv[2], u);
    const auto ev = nurbs_basis_3d(shell, p[0], p[1], p[2], false);
    const double expect = R1 + (R0 - R1) * 0.0;  // radius varies with zeta
    (void)expect;
    // radius must interpolate linearly in the rational parametrization
    const double r = ev.x.norm();
    CHECK(r >= R1 - 1e-12);
    CHECK(r <= R0 + 1e-12);
  }
  // faces are exact spheres
  for (const auto& u : random_params(300, 43)) {
    const auto ev0 = nurbs_basis_3d(
        shell, shell.kv[0].front() + u[0] * 4.0, shell.kv[1].front() + u[1] * 2.0,
        0.0, false);
    CHECK(std::abs(ev0.x.norm() - R1) < 1e-12 * R1);
    const auto ev1 = nurbs_basis_3d(
        shell, shell.kv[0].front() + u[0] * 4.0, shell.kv[1].front() + u[1] * 2.0,
        1.0, false);
    CHECK(std::abs(ev1.x.norm() - R0) < 1e-12 * R0);
  }
  // weights follow the {1, 1/sqrt2, 1/2} pattern
  const double s2 = 1.0 / std::sqrt(2.0);
  CHECK(shell.weights[shell.cp_index(0, 0, 0)] == doctest::Approx(1.0));
  CHECK(shell.weights[shell.cp_index(1, 0, 0)] == doctest::Approx(s2));
  CHECK(shell.weights[shell.cp_index(1, 1, 0)] == doctest::Approx(0.5));

  const NurbsPatch sphere = make_sphere(1.0);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 9; ++i)
      CHECK(sphere.cpts[sphere.cp_index(i, j, 0)].norm() == 0.0);
}

TEST_CASE("partition of unity and gradient sums") {
  const NurbsPatch shell = make_spherical_shell(1.0, 1.3);
  for (const auto& u : random_params(1000, 7)) {
    const auto p = scale_params(shell.kv[0], shell.kv[1], shell.kv[2], u);
    const auto ev = nurbs_basis_3d(shell, p[0], p[1], p[2], false);
    double s = 0.0, g[3] = {0, 0, 0};
    for (size_t a = 0; a < ev.values.size(); ++a) {
      s += ev.values[a];
      for (int d = 0; d < 3; ++d) g[d] += ev.grads_param[a][d];
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
    for (int d = 0; d < 3; ++d) CHECK(std::abs(g[d]) < 1e-9);
  }
}

TEST_CASE("physical gradients match finite differences") {
  const NurbsPatch shell = make_spherical_shell(1.0, 2.0);
  for (const auto& u : random_params(20, 3)) {
    std::array<double, 3> p = scale_params(shell.kv[0], shell.kv[1], shell.kv[2], u);
    for (int d = 0; d < 3; ++d) p[d] = 0.05 + 0.9 * (p[d] / (d == 0 ? 4.0 : d == 1 ? 2.0 : 1.0)) * (d == 0 ? 4.0 : d == 1 ? 2.0 : 1.0);
    const auto ev = nurbs_basis_3d(shell, p[0], p[1], p[2], true);
    // pick a coefficient field f = sum c_a R_a with pseudo-random c
    std::vector<double> c(ev.values.size());
    for (size_t a = 0; a < c.size(); ++a) c[a] = std::sin(1.0 + 3.7 * a);
    Vec3 grad = Vec3::Zero();
    for (size_t a = 0; a < c.size(); ++a)
      grad += c[a] * Vec3(ev.grads_phys[a][0], ev.grads_phys[a][1], ev.grads_phys[a][2]);
    // finite difference through the geometry map: df/dxi = grad . dx/dxi
    const double h = 1e-6;
    for (int d = 0; d < 3; ++d) {
      auto pp = p, pm = p;
      pp[d] += h;
      pm[d] -= h;
      const auto evp = nurbs_basis_3d(shell, pp[0], pp[1], pp[2], false);
      const auto evm = nurbs_basis_3d(shell, pm[0], pm[1], pm[2], false);
      double fp = 0.0, fm = 0.0;
      for (size_t a = 0; a < c.size(); ++a) {
        fp += c[a] * evp.values[a];
        fm += c[a] * evm.values[a];
      }
      const double fd = (fp - fm) / (2 * h);
      const double an = grad.dot(ev.jac.col(d));
      CHECK(an == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("knot insertion is geometry-preserving") {
  const NurbsPatch shell = make_spherical_shell(4.925, 5.075);
  const NurbsPatch same = insert_knots(shell, 2, {});
  CHECK(same.cpts.size() == shell.cpts.size());

  const NurbsPatch ref = insert_knots(shell, 2, {1.0 / 3.0, 2.0 / 3.0});
  CHECK(ref.n(2) == shell.n(2) + 2);
  for (const auto& u : random_params(1000, 11)) {
    const auto p = scale_params(shell.kv[0], shell.kv[1], shell.kv[2], u);
    const auto a = nurbs_basis_3d(shell, p[0], p[1], p[2], false);
    const auto b = nurbs_basis_3d(ref, p[0], p[1], p[2], false);
    CHECK((a.x - b.x).norm() < 1e-10);
  }

  // repeated insertion to multiplicity p creates a C0 line: the basis
  // derivative jumps across it
  const NurbsPatch c0 = insert_knots(shell, 1, {0.5, 0.5});
  const double eps = 1e-7;
  const auto evl = nurbs_basis_3d(c0, 1.0, 0.5 - eps, 0.5, false);
  const auto evr = nurbs_basis_3d(c0, 1.0, 0.5 + eps, 0.5, false);
  // field value continuous, eta-derivative of some basis function jumps
  double jump = 0.0;
  for (size_t a = 0; a < evl.values.size(); ++a)
    jump = std::max(jump, std::abs(evl.grads_param[a][1] - evr.grads_param[a][1]));
  CHECK(jump > 0.1);
}

TEST_CASE("degree elevation is geometry-preserving") {
  const NurbsPatch shell = make_spherical_shell(1.0, 1.2);
  CHECK(elevate_degree(shell, 0, 0).cpts.size() == shell.cpts.size());
  const NurbsPatch up = elevate_degree(elevate_degree(shell, 2, 1), 0, 1);
  CHECK(up.kv[2].degree == 2);
  CHECK(up.kv[0].degree == 3);
  for (const auto& u : random_params(500, 13)) {
    const auto p = scale_params(shell.kv[0], shell.kv[1], shell.kv[2], u);
    const auto a = nurbs_basis_3d(shell, p[0], p[1], p[2], false);
    const auto b = nurbs_basis_3d(up, p[0], p[1], p[2], false);
    CHECK((a.x - b.x).norm() < 1e-10);
  }
}

TEST_CASE("nurbs_to_bspline interpolates at the Greville grid") {
  // polynomial patch reproduces itself
  NurbsPatch cube;
  cube.kv[0] = KnotVector{{0, 0, 1, 1}, 1};
  cube.kv[1] = KnotVector{{0, 0, 1, 1}, 1};
  cube.kv[2] = KnotVector{{0, 0, 1, 1}, 1};
  cube.cpts.resize(8);
  cube.weights.assign(8, 1.0);
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        cube.cpts[cube.cp_index(i, j, l)] = Vec3(i, j, l);
  const NurbsPatch same = nurbs_to_bspline(cube);
  for (size_t c = 0; c < cube.cpts.size(); ++c)
    CHECK((same.cpts[c] - cube.cpts[c]).norm() < 1e-10);

  // sphere: interpolation residual tiny at Greville grid, midpoints off-sphere
  const NurbsPatch shell = make_spherical_shell(1.0, 1.2);
  const NurbsPatch bsp = nurbs_to_bspline(shell);
  auto g0 = greville_abscissae(shell.kv[0]);
  auto g1 = greville_abscissae(shell.kv[1]);
  auto g2 = greville_abscissae(shell.kv[2]);
  for (double xi : g0)
    for (double eta : g1)
      for (double zeta : g2) {
        const auto a = nurbs_basis_3d(shell, xi, eta, zeta, false);
        const auto b = nurbs_basis_3d(bsp, xi, eta, zeta, false);
        CHECK((a.x - b.x).norm() < 1e-9);
      }
  // geometric error strictly positive between interpolation points
  const auto mid = nurbs_basis_3d(bsp, 0.25, 0.25, 1.0, false);
  CHECK(std::abs(mid.x.norm() - 1.2) > 1e-6);

  // the error decreases under angular refinement
  NurbsPatch fine = insert_knots(insert_knots(shell, 0, {0.5, 1.5, 2.5, 3.5}),
                                 1, {0.5, 1.5});
  const NurbsPatch bsp_fine = nurbs_to_bspline(fine);
  const auto mid_f = nurbs_basis_3d(bsp_fine, 0.125, 0.125, 1.0, false);
  CHECK(std::abs(mid_f.x.norm() - 1.2) < std::abs(mid.x.norm() - 1.2));
}

TEST_CASE("topology and gluing") {
  const NurbsPatch shell = make_spherical_shell(4.925, 5.075);
  const auto topo = build_topology(shell, true);
  // 45 surface functions reduce to 26 after gluing (per radial layer)
  CHECK(topo.n_glued == 2 * 26);
  CHECK(static_cast<int>(topo.kappa_a.size()) == 26);
  CHECK(topo.num_elements() == 4 * 2 * 1);
  for (const auto& conn : topo.connectivity)
    CHECK(conn.size() == 3u * 3u * 2u);
  // glue map idempotent
  for (size_t a = 0; a < topo.glue_map.size(); ++a)
    CHECK(topo.glue_map[topo.glue_map[a]] == topo.glue_map[a]);

  const auto raw = build_topology(shell, false);
  CHECK(raw.n_glued == 9 * 5 * 2);
  for (size_t a = 0; a < raw.glue_map.size(); ++a)
    CHECK(raw.glue_map[a] == static_cast<int>(a));
}

TEST_CASE("patch serialization round-trips bit-exactly") {
  const NurbsPatch shell = make_spherical_shell(4.925, 5.075);
  std::stringstream ss;
  write_patch(ss, shell);
  const NurbsPatch back = read_patch(ss);
  CHECK(back.kv[0].degree == shell.kv[0].degree);
  for (int d = 0; d < 3; ++d) {
    REQUIRE(back.kv[d].knots.size() == shell.kv[d].knots.size());
    for (size_t i = 0; i < back.kv[d].knots.size(); ++i)
      CHECK(back.kv[d].knots[i] == shell.kv[d].knots[i]);
  }
  for (size_t c = 0; c < back.cpts.size(); ++c) {
    CHECK(back.cpts[c] == shell.cpts[c]);
    CHECK(back.weights[c] == shell.weights[c]);
  }
  // second write is byte-identical
  std::stringstream ss2;
  write_patch(ss2, back);
  std::stringstream ss3;
  write_patch(ss3, shell);
  CHECK(ss2.str() == ss3.str());
}
