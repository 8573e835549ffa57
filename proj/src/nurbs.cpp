// SPDX-License-Identifier: Apache-2.0
#include "scatter/nurbs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/LU>

namespace scatter::nurbs {

void KnotVector::validate() const {
  const int n = num_basis();
  if (degree < 0 || n < degree + 1)
    throw DomainError("KnotVector: too few knots for degree");
  for (size_t i = 1; i < knots.size(); ++i)
    if (knots[i] < knots[i - 1])
      throw DomainError("KnotVector: knots must be nondecreasing");
  for (int i = 0; i <= degree; ++i) {
    if (knots[i] != knots.front() ||
        knots[knots.size() - 1 - i] != knots.back())
      throw DomainError("KnotVector: knot vector must be open");
  }
  // interior multiplicity bound
  size_t i = degree + 1;
  while (i + degree + 1 < knots.size()) {
    size_t j = i;
    while (j < knots.size() && knots[j] == knots[i]) ++j;
    if (static_cast<int>(j - i) > degree + 1)
      throw DomainError("KnotVector: interior multiplicity exceeds degree+1");
    i = j;
  }
}

std::vector<int> KnotVector::nonzero_spans() const {
  std::vector<int> spans;
  const int n = num_basis();
  for (int i = degree; i < n; ++i)
    if (knots[i + 1] > knots[i]) spans.push_back(i);
  return spans;
}

int find_knot_span(const KnotVector& kv, double xi) {
  const int n = kv.num_basis();
  const auto& U = kv.knots;
  if (xi < U.front() || xi > U.back())
    throw DomainError("find_knot_span: xi outside knot range");
  if (xi >= U[n]) {
    // last nonzero span
    int i = n - 1;
    while (i > kv.degree && U[i + 1] <= U[i]) --i;
    return i;
  }
  int lo = kv.degree, hi = n;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (xi < U[mid])
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

void bspline_basis_ders(const KnotVector& kv, int span, double xi, double* N,
                        double* dN) {
  const int p = kv.degree;
  const auto& U = kv.knots;
  std::vector<double> left(p + 1), right(p + 1), lower(std::max(p, 1));

  N[0] = 1.0;
  if (p == 1) lower[0] = 1.0;  // degree-0 row, never reached by the capture below
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - U[span + 1 - j];
    right[j] = U[span + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double temp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
    if (j == p - 1)
      for (int r = 0; r < p; ++r) lower[r] = N[r];  // degree p-1 row
  }

  if (p == 0) {
    dN[0] = 0.0;
    return;
  }
  for (int a = 0; a <= p; ++a) {
    const int i = span - p + a;  // global function index
    double term1 = 0.0, term2 = 0.0;
    if (a > 0) {
      double denom = U[i + p] - U[i];
      if (denom > 0.0) term1 = lower[a - 1] / denom;
    }
    if (a < p) {
      double denom = U[i + p + 1] - U[i + 1];
      if (denom > 0.0) term2 = lower[a] / denom;
    }
    dN[a] = p * (term1 - term2);
  }
}

std::vector<double> greville_abscissae(const KnotVector& kv) {
  const int p = kv.degree;
  const int n = kv.num_basis();
  if (p < 1) throw DomainError("greville_abscissae: degree must be >= 1");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = i + 1; j <= i + p; ++j) s += kv.knots[j];
    g[i] = s / p;
  }
  return g;
}

void NurbsPatch::validate() const {
  for (const auto& k : kv) k.validate();
  const size_t expect = static_cast<size_t>(n(0)) * n(1) * n(2);
  if (cpts.size() != expect || weights.size() != expect)
    throw DomainError("NurbsPatch: control grid dimensions mismatch");
  for (double w : weights)
    if (!(w > 0.0)) throw DomainError("NurbsPatch: weights must be positive");
}

double NurbsPatch::bbox_diagonal() const {
  Vec3 lo = cpts.front(), hi = cpts.front();
  for (const auto& p : cpts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

BasisEval nurbs_basis_3d(const NurbsPatch& patch, double xi, double eta,
                         double zeta, bool with_phys) {
  const double par[3] = {xi, eta, zeta};
  std::array<int, 3> span;
  std::array<std::vector<double>, 3> N, dN;
  for (int d = 0; d < 3; ++d) {
    span[d] = find_knot_span(patch.kv[d], par[d]);
    const int p = patch.kv[d].degree;
    N[d].resize(p + 1);
    dN[d].resize(p + 1);
    bspline_basis_ders(patch.kv[d], span[d], par[d], N[d].data(), dN[d].data());
  }
  const int p0 = patch.kv[0].degree, p1 = patch.kv[1].degree,
            p2 = patch.kv[2].degree;
  const int n_en = (p0 + 1) * (p1 + 1) * (p2 + 1);

  BasisEval ev;
  ev.span = span;
  ev.values.resize(n_en);
  ev.grads_param.resize(n_en);
  ev.raw_indices.resize(n_en);

  // weight function W and its parametric derivatives
  double W = 0.0, dW[3] = {0.0, 0.0, 0.0};
  {
    int c = 0;
    for (int lc = 0; lc <= p2; ++lc)
      for (int jc = 0; jc <= p1; ++jc)
        for (int ic = 0; ic <= p0; ++ic, ++c) {
          const int gi = span[0] - p0 + ic;
          const int gj = span[1] - p1 + jc;
          const int gl = span[2] - p2 + lc;
          const size_t raw = patch.cp_index(gi, gj, gl);
          ev.raw_indices[c] = static_cast<int>(raw);
          const double w = patch.weights[raw];
          const double nnn = N[0][ic] * N[1][jc] * N[2][lc];
          W += nnn * w;
          dW[0] += dN[0][ic] * N[1][jc] * N[2][lc] * w;
          dW[1] += N[0][ic] * dN[1][jc] * N[2][lc] * w;
          dW[2] += N[0][ic] * N[1][jc] * dN[2][lc] * w;
        }
  }

  ev.x.setZero();
  ev.jac.setZero();
  {
    int c = 0;
    for (int lc = 0; lc <= p2; ++lc)
      for (int jc = 0; jc <= p1; ++jc)
        for (int ic = 0; ic <= p0; ++ic, ++c) {
          const size_t raw = ev.raw_indices[c];
          const double w = patch.weights[raw];
          const double nnn = N[0][ic] * N[1][jc] * N[2][lc];
          const double R = nnn * w / W;
          const double dn[3] = {dN[0][ic] * N[1][jc] * N[2][lc],
                                N[0][ic] * dN[1][jc] * N[2][lc],
                                N[0][ic] * N[1][jc] * dN[2][lc]};
          ev.values[c] = R;
          for (int d = 0; d < 3; ++d)
            ev.grads_param[c][d] = w * (dn[d] * W - nnn * dW[d]) / (W * W);
          ev.x += R * patch.cpts[raw];
          for (int d = 0; d < 3; ++d)
            ev.jac.col(d) += ev.grads_param[c][d] * patch.cpts[raw];
        }
  }
  ev.detJ = ev.jac.determinant();

  if (with_phys) {
    if (std::abs(ev.detJ) < 1e-14)
      throw SingularityError("nurbs_basis_3d: singular geometry Jacobian");
    const Eigen::Matrix3d JinvT = ev.jac.inverse().transpose();
    ev.grads_phys.resize(n_en);
    for (int c = 0; c < n_en; ++c) {
      Vec3 g(ev.grads_param[c][0], ev.grads_param[c][1], ev.grads_param[c][2]);
      Vec3 gp = JinvT * g;
      ev.grads_phys[c] = {gp[0], gp[1], gp[2]};
    }
  }
  return ev;
}

namespace {

// Homogeneous control grid (wx, wy, wz, w) helpers.
struct HomoGrid {
  std::vector<Eigen::Vector4d> data;
  int dims[3];
  Eigen::Vector4d& at(int i, int j, int l) {
    return data[i + static_cast<size_t>(dims[0]) * (j + static_cast<size_t>(dims[1]) * l)];
  }
};

HomoGrid to_homogeneous(const NurbsPatch& p) {
  HomoGrid g;
  g.dims[0] = p.n(0);
  g.dims[1] = p.n(1);
  g.dims[2] = p.n(2);
  g.data.resize(p.cpts.size());
  for (size_t c = 0; c < p.cpts.size(); ++c) {
    const double w = p.weights[c];
    g.data[c] << p.cpts[c][0] * w, p.cpts[c][1] * w, p.cpts[c][2] * w, w;
  }
  return g;
}

NurbsPatch from_homogeneous(const HomoGrid& g, std::array<KnotVector, 3> kv) {
  NurbsPatch p;
  p.kv = std::move(kv);
  p.cpts.resize(g.data.size());
  p.weights.resize(g.data.size());
  for (size_t c = 0; c < g.data.size(); ++c) {
    const double w = g.data[c][3];
    if (!(w > 0.0))
      throw DomainError("from_homogeneous: nonpositive weight produced");
    p.cpts[c] = g.data[c].head<3>() / w;
    p.weights[c] = w;
  }
  return p;
}

// Boehm single-knot insertion along one direction of a homogeneous grid.
void insert_one_knot(HomoGrid& g, KnotVector& kv, int dir, double u) {
  const int p = kv.degree;
  const auto& U = kv.knots;
  if (u < U.front() || u > U.back())
    throw DomainError("insert_knots: knot outside range");
  const int k = find_knot_span(kv, u);
  const int n_old = kv.num_basis();

  const int dims_new[3] = {g.dims[0] + (dir == 0), g.dims[1] + (dir == 1),
                           g.dims[2] + (dir == 2)};
  HomoGrid out;
  out.dims[0] = dims_new[0];
  out.dims[1] = dims_new[1];
  out.dims[2] = dims_new[2];
  out.data.resize(static_cast<size_t>(dims_new[0]) * dims_new[1] * dims_new[2]);

  auto line_old = [&](int idx, int t1, int t2) -> Eigen::Vector4d& {
    int ijk[3];
    ijk[dir] = idx;
    int o = 0;
    for (int d = 0; d < 3; ++d)
      if (d != dir) ijk[d] = (o++ == 0) ? t1 : t2;
    return g.at(ijk[0], ijk[1], ijk[2]);
  };
  auto line_new = [&](int idx, int t1, int t2) -> Eigen::Vector4d& {
    int ijk[3];
    ijk[dir] = idx;
    int o = 0;
    for (int d = 0; d < 3; ++d)
      if (d != dir) ijk[d] = (o++ == 0) ? t1 : t2;
    return out.data[ijk[0] + static_cast<size_t>(dims_new[0]) *
                                 (ijk[1] + static_cast<size_t>(dims_new[1]) * ijk[2])];
  };

  int trans1 = 0, trans2 = 0;
  {
    int o = 0;
    for (int d = 0; d < 3; ++d)
      if (d != dir) ((o++ == 0) ? trans1 : trans2) = g.dims[d];
  }
  for (int t2 = 0; t2 < trans2; ++t2)
    for (int t1 = 0; t1 < trans1; ++t1) {
      for (int i = 0; i <= k - p; ++i) line_new(i, t1, t2) = line_old(i, t1, t2);
      for (int i = k - p + 1; i <= k; ++i) {
        const double denom = U[i + p] - U[i];
        const double alpha = (denom > 0.0) ? (u - U[i]) / denom : 0.0;
        line_new(i, t1, t2) =
            alpha * line_old(i, t1, t2) + (1.0 - alpha) * line_old(i - 1, t1, t2);
      }
      for (int i = k + 1; i <= n_old; ++i)
        line_new(i, t1, t2) = line_old(i - 1, t1, t2);
    }

  kv.knots.insert(kv.knots.begin() + (k + 1), u);
  g = std::move(out);
}

// Solve the 1D Greville collocation problem A q = v along one direction for
// every transverse line of a grid of Eigen vectors.
template <int NC>
void collocate_direction(std::vector<Eigen::Matrix<double, NC, 1>>& grid,
                         int dims[3], int dir, const KnotVector& kv,
                         const std::vector<double>& sites) {
  const int n = kv.num_basis();
  if (static_cast<int>(sites.size()) != n || dims[dir] != n)
    throw DomainError("collocate_direction: size mismatch");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const int p = kv.degree;
  std::vector<double> N(p + 1), dN(p + 1);
  for (int b = 0; b < n; ++b) {
    const int span = find_knot_span(kv, sites[b]);
    bspline_basis_ders(kv, span, sites[b], N.data(), dN.data());
    for (int a = 0; a <= p; ++a) A(b, span - p + a) = N[a];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  // singularity check via residual on a probe
  {
    Eigen::VectorXd probe = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd sol = lu.solve(probe);
    if (!(sol.allFinite()) || (A * sol - probe).norm() > 1e-8 * probe.norm())
      throw SingularityError("collocation matrix is singular");
  }

  int trans1 = 0, trans2 = 0;
  {
    int o = 0;
    for (int d = 0; d < 3; ++d)
      if (d != dir) ((o++ == 0) ? trans1 : trans2) = dims[d];
  }
  auto at = [&](int idx, int t1, int t2) -> Eigen::Matrix<double, NC, 1>& {
    int ijk[3];
    ijk[dir] = idx;
    int o = 0;
    for (int d = 0; d < 3; ++d)
      if (d != dir) ijk[d] = (o++ == 0) ? t1 : t2;
    return grid[ijk[0] + static_cast<size_t>(dims[0]) *
                             (ijk[1] + static_cast<size_t>(dims[1]) * ijk[2])];
  };
  Eigen::MatrixXd rhs(n, NC), sol(n, NC);
  for (int t2 = 0; t2 < trans2; ++t2)
    for (int t1 = 0; t1 < trans1; ++t1) {
      for (int i = 0; i < n; ++i) rhs.row(i) = at(i, t1, t2).transpose();
      sol = lu.solve(rhs);
      for (int i = 0; i < n; ++i) at(i, t1, t2) = sol.row(i).transpose();
    }
}

}  // namespace

NurbsPatch insert_knots(const NurbsPatch& patch, int direction,
                        const std::vector<double>& new_knots) {
  if (direction < 0 || direction > 2)
    throw DomainError("insert_knots: bad direction");
  patch.validate();
  HomoGrid g = to_homogeneous(patch);
  std::array<KnotVector, 3> kv = patch.kv;
  for (double u : new_knots) insert_one_knot(g, kv[direction], direction, u);
  NurbsPatch out = from_homogeneous(g, kv);
  out.validate();
  return out;
}

NurbsPatch elevate_degree(const NurbsPatch& patch, int direction, int times) {
  if (direction < 0 || direction > 2)
    throw DomainError("elevate_degree: bad direction");
  if (times < 0) throw DomainError("elevate_degree: times must be >= 0");
  if (times == 0) return patch;
  patch.validate();

  // Elevated knot vector: every distinct knot's multiplicity raised by times.
  const KnotVector& old = patch.kv[direction];
  KnotVector target;
  target.degree = old.degree + times;
  for (size_t i = 0; i < old.knots.size();) {
    size_t j = i;
    while (j < old.knots.size() && old.knots[j] == old.knots[i]) ++j;
    const int mult = static_cast<int>(j - i) + times;
    for (int m = 0; m < mult; ++m) target.knots.push_back(old.knots[i]);
    i = j;
  }
  target.validate();

  std::array<KnotVector, 3> kv_new = patch.kv;
  kv_new[direction] = target;

  // Interpolate the homogeneous coordinates at the elevated Greville sites;
  // exact because the original lies in the elevated space.
  const std::vector<double> sites = greville_abscissae(target);
  const int n_new = target.num_basis();
  int dims[3] = {patch.n(0), patch.n(1), patch.n(2)};
  dims[direction] = n_new;
  std::vector<Eigen::Vector4d> grid(static_cast<size_t>(dims[0]) * dims[1] *
                                    dims[2]);

  // Evaluate homogeneous curves along `direction` at each site.
  const HomoGrid src = to_homogeneous(patch);
  const KnotVector& skv = old;
  const int p = skv.degree;
  std::vector<double> N(p + 1), dN(p + 1);
  int trans[2] = {1, 1};
  {
    int o = 0;
    for (int d = 0; d < 3; ++d)
      if (d != direction) trans[o++] = dims[d];
  }
  for (int b = 0; b < n_new; ++b) {
    const int span = find_knot_span(skv, sites[b]);
    bspline_basis_ders(skv, span, sites[b], N.data(), dN.data());
    for (int t2 = 0; t2 < trans[1]; ++t2)
      for (int t1 = 0; t1 < trans[0]; ++t1) {
        int ijk[3];
        ijk[direction] = b;
        int o = 0;
        for (int d = 0; d < 3; ++d)
          if (d != direction) ijk[d] = (o++ == 0) ? t1 : t2;
        Eigen::Vector4d v = Eigen::Vector4d::Zero();
        for (int a = 0; a <= p; ++a) {
          int sidx[3] = {ijk[0], ijk[1], ijk[2]};
          sidx[direction] = span - p + a;
          v += N[a] *
               src.data[sidx[0] + static_cast<size_t>(src.dims[0]) *
                                      (sidx[1] +
                                       static_cast<size_t>(src.dims[1]) * sidx[2])];
        }
        grid[ijk[0] + static_cast<size_t>(dims[0]) *
                          (ijk[1] + static_cast<size_t>(dims[1]) * ijk[2])] = v;
      }
  }

  collocate_direction<4>(grid, dims, direction, target, sites);

  HomoGrid out;
  out.dims[0] = dims[0];
  out.dims[1] = dims[1];
  out.dims[2] = dims[2];
  out.data = std::move(grid);
  NurbsPatch res = from_homogeneous(out, kv_new);
  res.validate();
  return res;
}

NurbsPatch interpolate_to_space(const NurbsPatch& patch,
                                const std::array<KnotVector, 3>& target) {
  patch.validate();
  for (const auto& k : target) k.validate();
  std::array<std::vector<double>, 3> sites;
  int dims[3];
  for (int d = 0; d < 3; ++d) {
    sites[d] = greville_abscissae(target[d]);
    dims[d] = target[d].num_basis();
  }
  std::vector<Eigen::Vector3d> grid(static_cast<size_t>(dims[0]) * dims[1] *
                                    dims[2]);
  for (int l = 0; l < dims[2]; ++l)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        BasisEval ev = nurbs_basis_3d(patch, sites[0][i], sites[1][j],
                                      sites[2][l], /*with_phys=*/false);
        grid[i + static_cast<size_t>(dims[0]) *
                     (j + static_cast<size_t>(dims[1]) * l)] = ev.x;
      }
  for (int d = 0; d < 3; ++d) collocate_direction<3>(grid, dims, d, target[d], sites[d]);

  NurbsPatch out;
  out.kv = target;
  out.cpts.resize(grid.size());
  out.weights.assign(grid.size(), 1.0);
  for (size_t c = 0; c < grid.size(); ++c) out.cpts[c] = grid[c];
  out.validate();
  return out;
}

NurbsPatch nurbs_to_bspline(const NurbsPatch& patch) {
  return interpolate_to_space(patch, patch.kv);
}

namespace {

NurbsPatch make_shell_like(double R_inner, double R_outer, bool degenerate_inner) {
  const double s2 = 1.0 / std::sqrt(2.0);
  // 9-point circle control polygon in the xy-plane
  const double ux[9] = {1, 1, 0, -1, -1, -1, 0, 1, 1};
  const double uy[9] = {0, 1, 1, 1, 0, -1, -1, -1, 0};
  const double wxi[9] = {1, s2, 1, s2, 1, s2, 1, s2, 1};
  // pole-to-pole profile (a, z): a scales the circle, z the height
  const double pa[5] = {0, 1, 1, 1, 0};
  const double pz[5] = {-1, -1, 0, 1, 1};
  const double weta[5] = {1, s2, 1, s2, 1};

  NurbsPatch p;
  p.kv[0] = KnotVector{{0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 4}, 2};
  p.kv[1] = KnotVector{{0, 0, 0, 1, 1, 2, 2, 2}, 2};
  p.kv[2] = KnotVector{{0, 0, 1, 1}, 1};
  const size_t total = 9 * 5 * 2;
  p.cpts.resize(total);
  p.weights.resize(total);
  for (int l = 0; l < 2; ++l) {
    const double R = (l == 0) ? R_inner : R_outer;
    const bool zero = (l == 0) && degenerate_inner;
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 9; ++i) {
        const size_t c = p.cp_index(i, j, l);
        p.cpts[c] = zero ? Vec3(0, 0, 0)
                         : Vec3(R * pa[j] * ux[i], R * pa[j] * uy[i], R * pz[j]);
        p.weights[c] = wxi[i] * weta[j];
      }
  }
  p.validate();
  return p;
}

}  // namespace

NurbsPatch make_sphere(double R0) {
  if (!(R0 > 0.0)) throw DomainError("make_sphere: R0 must be positive");
  return make_shell_like(0.0, R0, /*degenerate_inner=*/true);
}

NurbsPatch make_spherical_shell(double R1, double R0) {
  if (!(0.0 < R1 && R1 < R0))
    throw DomainError("make_spherical_shell: need 0 < R1 < R0");
  return make_shell_like(R1, R0, false);
}

NurbsPatch make_fluid_shell(double R0, double r_a) {
  if (!(0.0 < R0 && R0 < r_a))
    throw DomainError("make_fluid_shell: need 0 < R0 < r_a");
  return make_shell_like(R0, r_a, false);
}

std::array<std::array<double, 2>, 3> MeshTopology::element_box(
    const NurbsPatch& patch, int e) const {
  const int na = num_elements_dir(0), nb = num_elements_dir(1);
  const int ia = e % na;
  const int ib = (e / na) % nb;
  const int ic = e / (na * nb);
  const int sp[3] = {spans[0][ia], spans[1][ib], spans[2][ic]};
  std::array<std::array<double, 2>, 3> box;
  for (int d = 0; d < 3; ++d)
    box[d] = {patch.kv[d].knots[sp[d]], patch.kv[d].knots[sp[d] + 1]};
  return box;
}

MeshTopology build_topology(const NurbsPatch& patch, bool periodic) {
  patch.validate();
  MeshTopology topo;
  for (int d = 0; d < 3; ++d) topo.spans[d] = patch.kv[d].nonzero_spans();

  const int n_raw = static_cast<int>(patch.cpts.size());
  topo.glue_map.resize(n_raw);
  std::iota(topo.glue_map.begin(), topo.glue_map.end(), 0);

  if (periodic) {
    // union-find over coincident control points with equal weights
    std::vector<int> parent(n_raw);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    auto unite = [&](int a, int b) {
      a = find(a);
      b = find(b);
      if (a == b) return;
      if (a > b) std::swap(a, b);
      parent[b] = a;  // lowest index is the parent
    };

    double diag = patch.bbox_diagonal();
    const double tol = (diag > 0.0 ? diag : 1.0) * 1e-10;
    std::vector<int> order(n_raw);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const Vec3 &A = patch.cpts[a], &B = patch.cpts[b];
      if (A[0] != B[0]) return A[0] < B[0];
      if (A[1] != B[1]) return A[1] < B[1];
      return A[2] < B[2];
    });
    for (int a = 0; a < n_raw; ++a) {
      for (int b = a + 1; b < n_raw; ++b) {
        const Vec3 &A = patch.cpts[order[a]], &B = patch.cpts[order[b]];
        if (B[0] - A[0] > tol) break;
        if ((A - B).norm() < tol) unite(order[a], order[b]);
      }
    }
    for (int a = 0; a < n_raw; ++a) topo.glue_map[a] = find(a);
  }

  // compress parents to glued dof ids, ordered by parent raw index
  std::vector<int> glued_of_raw(n_raw, -1);
  int next = 0;
  for (int a = 0; a < n_raw; ++a)
    if (topo.glue_map[a] == a) glued_of_raw[a] = next++;
  topo.n_glued = next;
  topo.raw_to_glued.resize(n_raw);
  for (int a = 0; a < n_raw; ++a)
    topo.raw_to_glued[a] = glued_of_raw[topo.glue_map[a]];

  // element connectivity (xi-fastest local and element ordering)
  const int p0 = patch.kv[0].degree, p1 = patch.kv[1].degree,
            p2 = patch.kv[2].degree;
  topo.connectivity.reserve(static_cast<size_t>(topo.spans[0].size()) *
                            topo.spans[1].size() * topo.spans[2].size());
  for (int ic = 0; ic < static_cast<int>(topo.spans[2].size()); ++ic)
    for (int ib = 0; ib < static_cast<int>(topo.spans[1].size()); ++ib)
      for (int ia = 0; ia < static_cast<int>(topo.spans[0].size()); ++ia) {
        std::vector<int> conn;
        conn.reserve((p0 + 1) * (p1 + 1) * (p2 + 1));
        const int s0 = topo.spans[0][ia], s1 = topo.spans[1][ib],
                  s2 = topo.spans[2][ic];
        for (int c = 0; c <= p2; ++c)
          for (int b = 0; b <= p1; ++b)
            for (int a = 0; a <= p0; ++a) {
              const size_t raw =
                  patch.cp_index(s0 - p0 + a, s1 - p1 + b, s2 - p2 + c);
              conn.push_back(topo.raw_to_glued[raw]);
            }
        topo.connectivity.push_back(std::move(conn));
      }

  // kappa_a: glued ids supported on the zeta = 1 face (last control layer)
  std::vector<char> on_face(topo.n_glued, 0);
  const int n0 = patch.n(0), n1 = patch.n(1), n2 = patch.n(2);
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i)
      on_face[topo.raw_to_glued[patch.cp_index(i, j, n2 - 1)]] = 1;
  topo.kappa_a_pos.assign(topo.n_glued, -1);
  for (int g = 0; g < topo.n_glued; ++g)
    if (on_face[g]) {
      topo.kappa_a_pos[g] = static_cast<int>(topo.kappa_a.size());
      topo.kappa_a.push_back(g);
    }
  return topo;
}

void write_patch(std::ostream& os, const NurbsPatch& patch) {
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  os << "degrees " << patch.kv[0].degree << " " << patch.kv[1].degree << " "
     << patch.kv[2].degree << "\n";
  const char* names[3] = {"knots.xi", "knots.eta", "knots.zeta"};
  for (int d = 0; d < 3; ++d) {
    os << names[d];
    for (double k : patch.kv[d].knots) {
      os << " ";
      put(k);
    }
    os << "\n";
  }
  os << "cpts " << patch.n(0) << " " << patch.n(1) << " " << patch.n(2) << "\n";
  for (size_t c = 0; c < patch.cpts.size(); ++c) {
    put(patch.cpts[c][0]);
    os << " ";
    put(patch.cpts[c][1]);
    os << " ";
    put(patch.cpts[c][2]);
    os << " ";
    put(patch.weights[c]);
    os << "\n";
  }
}

NurbsPatch read_patch(std::istream& is) {
  NurbsPatch p;
  std::string tok;
  if (!(is >> tok) || tok != "degrees")
    throw DomainError("read_patch: expected 'degrees'");
  for (int d = 0; d < 3; ++d) is >> p.kv[d].degree;
  for (int d = 0; d < 3; ++d) {
    const char* names[3] = {"knots.xi", "knots.eta", "knots.zeta"};
    if (!(is >> tok) || tok != names[d])
      throw DomainError("read_patch: expected knot section");
    std::string line;
    std::getline(is, line);
    std::istringstream ls(line);
    double v;
    while (ls >> v) p.kv[d].knots.push_back(v);
  }
  if (!(is >> tok) || tok != "cpts") throw DomainError("read_patch: expected 'cpts'");
  int n0, n1, n2;
  is >> n0 >> n1 >> n2;
  if (n0 != p.kv[0].num_basis() || n1 != p.kv[1].num_basis() ||
      n2 != p.kv[2].num_basis())
    throw DomainError("read_patch: dimension mismatch");
  const size_t total = static_cast<size_t>(n0) * n1 * n2;
  p.cpts.resize(total);
  p.weights.resize(total);
  for (size_t c = 0; c < total; ++c) {
    is >> p.cpts[c][0] >> p.cpts[c][1] >> p.cpts[c][2] >> p.weights[c];
  }
  if (!is) throw DomainError("read_patch: truncated input");
  p.validate();
  return p;
}

}  // namespace scatter::nurbs
