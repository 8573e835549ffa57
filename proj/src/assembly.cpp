// SPDX-License-Identifier: Apache-2.0
#include "scatter/assembly.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <cmath>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace scatter::assembly {

using nurbs::BasisEval;
using nurbs::MeshTopology;
using nurbs::NurbsPatch;

const char* to_string(IeFormulation f) {
  switch (f) {
    case IeFormulation::PGU: return "PGU";
    case IeFormulation::PGC: return "PGC";
    case IeFormulation::BGU: return "BGU";
    default: return "BGC";
  }
}

const char* to_string(RadialBasis b) {
  switch (b) {
    case RadialBasis::Lagrange: return "lagrange";
    case RadialBasis::Chebyshev: return "chebyshev";
    default: return "bernstein";
  }
}

IeFormulation ie_formulation_from_string(const std::string& s) {
  if (s == "PGU" || s == "pgu") return IeFormulation::PGU;
  if (s == "PGC" || s == "pgc") return IeFormulation::PGC;
  if (s == "BGU" || s == "bgu") return IeFormulation::BGU;
  if (s == "BGC" || s == "bgc") return IeFormulation::BGC;
  throw DomainError("unknown IE formulation: " + s);
}

RadialBasis radial_basis_from_string(const std::string& s) {
  if (s == "lagrange") return RadialBasis::Lagrange;
  if (s == "chebyshev") return RadialBasis::Chebyshev;
  if (s == "bernstein") return RadialBasis::Bernstein;
  throw DomainError("unknown radial basis: " + s);
}

// ----------------------------------------------------------- radial bases

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Q_1 = x, Q_m = x (T~_{m-1}(x) - 1) in the monomial basis.
Eigen::MatrixXd chebyshev_D(int N) {
  // monomial coefficients of the shifted Chebyshev polynomials
  std::vector<std::vector<double>> T(std::max(N, 2));
  T[0] = {1.0};
  T[1] = {-1.0, 2.0};
  for (int m = 2; m < N; ++m) {
    // T_m = (4x - 2) T_{m-1} - T_{m-2}
    std::vector<double> c(m + 1, 0.0);
    for (size_t j = 0; j < T[m - 1].size(); ++j) {
      c[j + 1] += 4.0 * T[m - 1][j];
      c[j] -= 2.0 * T[m - 1][j];
    }
    for (size_t j = 0; j < T[m - 2].size(); ++j) c[j] -= T[m - 2][j];
    T[m] = std::move(c);
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N);
  D(0, 0) = 1.0;  // Q_1 = x
  for (int m = 2; m <= N; ++m) {
    // x (T_{m-1}(x) - 1): monomial exponent mt = j + 1
    for (size_t j = 0; j < T[m - 1].size(); ++j) D(m - 1, j) += T[m - 1][j];
    D(m - 1, 0) -= 1.0;
  }
  return D;
}

// Q_m = x b_{p+1-m, p}(x) with p = N - 1.
Eigen::MatrixXd bernstein_D(int N) {
  const int p = N - 1;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N);
  for (int m = 1; m <= N; ++m) {
    const int i = p + 1 - m;
    // b_{i,p}(x) = sum_j (-1)^j C(p,i) C(p-i,j) x^{i+j}
    for (int j = 0; j <= p - i; ++j) {
      const double c = ((j % 2 == 0) ? 1.0 : -1.0) * binomial(p, i) * binomial(p - i, j);
      D(m - 1, i + j) += c;  // exponent of Q_m is i + j + 1 -> column i+j (1-based mt)
    }
  }
  return D;
}

Eigen::MatrixXcd lagrange_D(int N, double k, double r_a,
                            const std::vector<double>& r_n, int exponent_shift) {
  Eigen::MatrixXcd B(N, N);
  for (int col = 0; col < N; ++col) {
    const double x = r_a / r_n[col];
    for (int row = 0; row < N; ++row)
      B(row, col) = std::pow(x, row + 1 + exponent_shift);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
  const double cond = svd.singularValues()(0) / svd.singularValues()(N - 1);
  if (!(cond < 1e14))
    throw SingularityError(
        "radial_coefficients: Lagrange node matrix condition exceeds 1e14");
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(N, N);
  for (int n = 0; n < N; ++n)
    E(n, n) = std::exp(I_UNIT * k * (r_a - r_n[n]));
  // D B = E  =>  D = E B^{-1}; solve B^T D^T = E^T
  return B.transpose().lu().solve(E.transpose()).transpose();
}

}  // namespace

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> radial_coefficients(
    IeFormulation f, RadialBasis basis, int N, double k, double r_a,
    std::vector<double> r_n) {
  if (N < 1 || N > 8) throw DomainError("radial_coefficients: need 1 <= N <= 8");
  Eigen::MatrixXcd D, Dt;
  const bool bubnov =
      (f == IeFormulation::BGU || f == IeFormulation::BGC);
  if (basis == RadialBasis::Chebyshev) {
    D = chebyshev_D(N).cast<Complex>();
    Dt = D;
  } else if (basis == RadialBasis::Bernstein) {
    D = bernstein_D(N).cast<Complex>();
    Dt = D;
  } else {
    if (r_n.empty()) {
      r_n.resize(N);
      for (int n = 0; n < N; ++n) r_n[n] = (n + 1) * r_a;  // Burnett layers
    }
    if (static_cast<int>(r_n.size()) != N)
      throw DomainError("radial_coefficients: r_n size must equal N");
    for (int n = 1; n < N; ++n)
      if (!(r_n[n] > r_n[n - 1]))
        throw DomainError("radial_coefficients: r_n must be strictly increasing");
    if (std::abs(r_n[0] - r_a) > 1e-12 * r_a)
      throw DomainError("radial_coefficients: r_1 must equal r_a");
    D = lagrange_D(N, k, r_a, r_n, 0);
    Dt = bubnov ? D : lagrange_D(N, k, r_a, r_n, 2);
  }
  // Q_m(1) = delta_{m1} sanity check
  for (int m = 0; m < N; ++m) {
    const Complex s = D.row(m).sum();
    const double expect = (m == 0) ? 1.0 : 0.0;
    const double scale = std::max(1.0, D.row(m).cwiseAbs().maxCoeff());
    if (std::abs(s - expect) > 1e-9 * scale)
      throw ConvergenceError("radial_coefficients: Q_m(1) != delta_m1");
  }
  return {D, Dt};
}

IeContext make_ie_context(IeFormulation f, RadialBasis basis, int N, double k,
                          double r_a, double upsilon, std::vector<double> r_n) {
  if (!(r_a > upsilon))
    throw GeometryError("make_ie_context: artificial boundary must satisfy r_a > Upsilon");
  IeContext ie;
  ie.formulation = f;
  ie.basis = basis;
  ie.N = N;
  ie.k = k;
  ie.r_a = r_a;
  ie.upsilon = upsilon;
  if (basis == RadialBasis::Lagrange && r_n.empty()) {
    r_n.resize(N);
    for (int n = 0; n < N; ++n) r_n[n] = (n + 1) * r_a;
  }
  ie.r_n = r_n;
  std::tie(ie.D, ie.D_tilde) = radial_coefficients(f, basis, N, k, r_a, r_n);
  return ie;
}

specfun::RadialIntegralTable radial_integrals_for(const IeContext& ie) {
  return specfun::radial_integrals(ie.rho1(), ie.rho2(), ie.conjugated(),
                                   2 * ie.N + 4);
}

// ------------------------------------------------------------------ surfaces

namespace {

int face_zeta_span(const MeshTopology& topo, int face) {
  const auto& zspans = topo.spans[2];
  return face == 0 ? 0 : static_cast<int>(zspans.size()) - 1;
}

}  // namespace

void for_each_face_point(const NurbsPatch& patch, const MeshTopology& topo,
                         int face, int nq,
                         const std::function<void(const FacePoint&)>& fn,
                         bool with_phys_grads) {
  if (face != 0 && face != 1) throw DomainError("for_each_face_point: face must be 0 or 1");
  const double zeta = (face == 0) ? patch.kv[2].front() : patch.kv[2].back();
  const int zc = face_zeta_span(topo, face);
  const int nqx = (nq > 0) ? nq : patch.kv[0].degree + 1;
  const int nqy = (nq > 0) ? nq : patch.kv[1].degree + 1;
  const QuadratureRule qx = gauss_rule(nqx), qy = gauss_rule(nqy);

  for (int ib = 0; ib < topo.num_elements_dir(1); ++ib)
    for (int ia = 0; ia < topo.num_elements_dir(0); ++ia) {
      const int elem = topo.element_index(ia, ib, zc);
      const int sa = topo.spans[0][ia], sb = topo.spans[1][ib];
      const double x0 = patch.kv[0].knots[sa], x1 = patch.kv[0].knots[sa + 1];
      const double y0 = patch.kv[1].knots[sb], y1 = patch.kv[1].knots[sb + 1];
      const double jx = 0.5 * (x1 - x0), jy = 0.5 * (y1 - y0);
      for (int qb = 0; qb < nqy; ++qb)
        for (int qa = 0; qa < nqx; ++qa) {
          const double xi = x0 + jx * (qx.points[qa] + 1.0);
          const double eta = y0 + jy * (qy.points[qb] + 1.0);
          BasisEval ev = nurbs_basis_3d(patch, xi, eta, zeta, with_phys_grads);
          FacePoint fp;
          fp.xi = xi;
          fp.eta = eta;
          fp.x = ev.x;
          fp.t_xi = ev.jac.col(0);
          fp.t_eta = ev.jac.col(1);
          const Vec3 cr = fp.t_xi.cross(fp.t_eta);
          const double area = cr.norm();
          if (!(area > 0.0))
            throw GeometryError("for_each_face_point: degenerate surface element");
          // outward direction: along +dzeta at face 1, along -dzeta at face 0
          const double sign = cr.dot(ev.jac.col(2)) >= 0.0 ? 1.0 : -1.0;
          fp.normal_out = cr / area * sign * (face == 1 ? 1.0 : -1.0);
          fp.dGamma = area * qx.weights[qa] * qy.weights[qb] * jx * jy;
          fp.ev = &ev;
          fp.elem = elem;
          fn(fp);
        }
    }
}

double face_area(const NurbsPatch& patch, const MeshTopology& topo, int face,
                 int nq) {
  double area = 0.0;
  for_each_face_point(patch, topo, face, nq,
                      [&](const FacePoint& fp) { area += fp.dGamma; });
  return area;
}

double patch_volume(const NurbsPatch& patch, const MeshTopology& topo, int nq) {
  const int nqd[3] = {nq > 0 ? nq : patch.kv[0].degree + 1,
                      nq > 0 ? nq : patch.kv[1].degree + 1,
                      nq > 0 ? nq : patch.kv[2].degree + 1};
  QuadratureRule q[3] = {gauss_rule(nqd[0]), gauss_rule(nqd[1]), gauss_rule(nqd[2])};
  double vol = 0.0;
  for (int e = 0; e < topo.num_elements(); ++e) {
    const auto box = topo.element_box(patch, e);
    const double jj = 0.125 * (box[0][1] - box[0][0]) * (box[1][1] - box[1][0]) *
                      (box[2][1] - box[2][0]);
    for (int c = 0; c < nqd[2]; ++c)
      for (int b = 0; b < nqd[1]; ++b)
        for (int a = 0; a < nqd[0]; ++a) {
          const double xi = box[0][0] + 0.5 * (box[0][1] - box[0][0]) * (q[0].points[a] + 1.0);
          const double eta = box[1][0] + 0.5 * (box[1][1] - box[1][0]) * (q[1].points[b] + 1.0);
          const double zeta = box[2][0] + 0.5 * (box[2][1] - box[2][0]) * (q[2].points[c] + 1.0);
          BasisEval ev = nurbs_basis_3d(patch, xi, eta, zeta, false);
          vol += std::abs(ev.detJ) * q[0].weights[a] * q[1].weights[b] *
                 q[2].weights[c] * jj * 8.0 / 8.0;
        }
  }
  return vol;
}

double max_element_diameter(const NurbsPatch& patch, const MeshTopology& topo) {
  double h = 0.0;
  for (int e = 0; e < topo.num_elements(); ++e) {
    const auto box = topo.element_box(patch, e);
    Vec3 corners[8];
    int c = 0;
    for (int ic = 0; ic < 2; ++ic)
      for (int ib = 0; ib < 2; ++ib)
        for (int ia = 0; ia < 2; ++ia)
          corners[c++] = nurbs_basis_3d(patch, box[0][ia], box[1][ib], box[2][ic],
                                        false)
                             .x;
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j)
        h = std::max(h, (corners[i] - corners[j]).norm());
  }
  return h;
}

// -------------------------------------------------------------- volume loops

namespace {

template <typename Body>
void parallel_elements(int n_elements, int n_threads, Body&& body) {
  n_threads = std::max(1, n_threads);
  if (n_threads == 1) {
    for (int e = 0; e < n_elements; ++e) body(e);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  std::exception_ptr err;
  std::mutex err_mutex;
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      try {
        for (int e = next.fetch_add(1); e < n_elements; e = next.fetch_add(1))
          body(e);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

struct ElementQuadrature {
  std::array<QuadratureRule, 3> rule;
  std::array<int, 3> nq;
};

ElementQuadrature volume_rule(const NurbsPatch& patch, int nq) {
  ElementQuadrature eq;
  for (int d = 0; d < 3; ++d) {
    eq.nq[d] = (nq > 0) ? nq : patch.kv[d].degree + 1;
    eq.rule[d] = gauss_rule(eq.nq[d]);
  }
  return eq;
}

}  // namespace

la::ComplexTripletMatrix assemble_helmholtz(const NurbsPatch& patch,
                                            const MeshTopology& topo, double k,
                                            int nq, int n_threads) {
  const ElementQuadrature eq = volume_rule(patch, nq);
  const int n_el = topo.num_elements();
  std::vector<la::ComplexTripletMatrix> local(n_el);

  parallel_elements(n_el, n_threads, [&](int e) {
    const auto box = topo.element_box(patch, e);
    const double jj = 0.125 * (box[0][1] - box[0][0]) * (box[1][1] - box[1][0]) *
                      (box[2][1] - box[2][0]);
    const auto& conn = topo.connectivity[e];
    const int n_en = static_cast<int>(conn.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n_en, n_en);
    for (int c = 0; c < eq.nq[2]; ++c)
      for (int b = 0; b < eq.nq[1]; ++b)
        for (int a = 0; a < eq.nq[0]; ++a) {
          const double xi =
              box[0][0] + 0.5 * (box[0][1] - box[0][0]) * (eq.rule[0].points[a] + 1.0);
          const double eta =
              box[1][0] + 0.5 * (box[1][1] - box[1][0]) * (eq.rule[1].points[b] + 1.0);
          const double zeta =
              box[2][0] + 0.5 * (box[2][1] - box[2][0]) * (eq.rule[2].points[c] + 1.0);
          BasisEval ev = nurbs_basis_3d(patch, xi, eta, zeta, true);
          const double w = eq.rule[0].weights[a] * eq.rule[1].weights[b] *
                           eq.rule[2].weights[c] * jj * std::abs(ev.detJ);
          for (int ai = 0; ai < n_en; ++ai) {
            const auto& ga = ev.grads_phys[ai];
            for (int bi = 0; bi < n_en; ++bi) {
              const auto& gb = ev.grads_phys[bi];
              const double grad = ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2];
              K(ai, bi) += (grad - k * k * ev.values[ai] * ev.values[bi]) * w;
            }
          }
        }
    la::ComplexTripletMatrix t(topo.n_glued, topo.n_glued);
    for (int ai = 0; ai < n_en; ++ai)
      for (int bi = 0; bi < n_en; ++bi)
        t.add(conn[ai], conn[bi], K(ai, bi));
    local[e] = std::move(t);
  });

  la::ComplexTripletMatrix out(topo.n_glued, topo.n_glued);
  for (int e = 0; e < n_el; ++e) out.append(local[e], 0, 0);
  return out;
}

la::ComplexTripletMatrix assemble_elasticity(const NurbsPatch& patch,
                                             const MeshTopology& topo,
                                             const analytic::MaterialParams& mat,
                                             double omega, int nq, int n_threads) {
  mat.validate();
  const double lam = mat.lambda();
  const double mu = mat.mu();
  const double rw2 = mat.rho_s * omega * omega;
  const ElementQuadrature eq = volume_rule(patch, nq);
  const int n_el = topo.num_elements();
  std::vector<la::ComplexTripletMatrix> local(n_el);

  parallel_elements(n_el, n_threads, [&](int e) {
    const auto box = topo.element_box(patch, e);
    const double jj = 0.125 * (box[0][1] - box[0][0]) * (box[1][1] - box[1][0]) *
                      (box[2][1] - box[2][0]);
    const auto& conn = topo.connectivity[e];
    const int n_en = static_cast<int>(conn.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3 * n_en, 3 * n_en);
    for (int c = 0; c < eq.nq[2]; ++c)
      for (int b = 0; b < eq.nq[1]; ++b)
        for (int a = 0; a < eq.nq[0]; ++a) {
          const double xi =
              box[0][0] + 0.5 * (box[0][1] - box[0][0]) * (eq.rule[0].points[a] + 1.0);
          const double eta =
              box[1][0] + 0.5 * (box[1][1] - box[1][0]) * (eq.rule[1].points[b] + 1.0);
          const double zeta =
              box[2][0] + 0.5 * (box[2][1] - box[2][0]) * (eq.rule[2].points[c] + 1.0);
          BasisEval ev = nurbs_basis_3d(patch, xi, eta, zeta, true);
          const double w = eq.rule[0].weights[a] * eq.rule[1].weights[b] *
                           eq.rule[2].weights[c] * jj * std::abs(ev.detJ);
          for (int ai = 0; ai < n_en; ++ai) {
            const auto& ga = ev.grads_phys[ai];
            for (int bi = 0; bi < n_en; ++bi) {
              const auto& gb = ev.grads_phys[bi];
              const double gdot = ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2];
              const double mass = rw2 * ev.values[ai] * ev.values[bi];
              for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                  double v = lam * ga[i] * gb[j] + mu * ga[j] * gb[i];
                  if (i == j) v += mu * gdot - mass;
                  K(3 * ai + i, 3 * bi + j) += v * w;
                }
            }
          }
        }
    la::ComplexTripletMatrix t(3 * topo.n_glued, 3 * topo.n_glued);
    for (int ai = 0; ai < n_en; ++ai)
      for (int i = 0; i < 3; ++i)
        for (int bi = 0; bi < n_en; ++bi)
          for (int j = 0; j < 3; ++j)
            t.add(3 * conn[ai] + i, 3 * conn[bi] + j, K(3 * ai + i, 3 * bi + j));
    local[e] = std::move(t);
  });

  la::ComplexTripletMatrix out(3 * topo.n_glued, 3 * topo.n_glued);
  for (int e = 0; e < n_el; ++e) out.append(local[e], 0, 0);
  return out;
}

la::ComplexTripletMatrix assemble_coupling(const NurbsPatch& fluid,
                                           const MeshTopology& fluid_topo,
                                           int fluid_face, const NurbsPatch& solid,
                                           const MeshTopology& solid_topo,
                                           int solid_face, int nq) {
  for (int d = 0; d < 2; ++d) {
    if (fluid.kv[d].degree != solid.kv[d].degree ||
        fluid.kv[d].knots.size() != solid.kv[d].knots.size())
      throw GeometryError("assemble_coupling: interface parametrizations differ");
    for (size_t i = 0; i < fluid.kv[d].knots.size(); ++i)
      if (std::abs(fluid.kv[d].knots[i] - solid.kv[d].knots[i]) > 1e-12)
        throw GeometryError("assemble_coupling: interface knot vectors differ");
  }
  const double scale_len = std::max(fluid.bbox_diagonal(), 1e-30);
  const double f_zeta = (fluid_face == 0) ? fluid.kv[2].front() : fluid.kv[2].back();

  // integrate over the solid face; the normal points out of the solid
  la::ComplexTripletMatrix t(fluid_topo.n_glued, 3 * solid_topo.n_glued);
  for_each_face_point(solid, solid_topo, solid_face, nq, [&](const FacePoint& fp) {
    BasisEval evf = nurbs_basis_3d(fluid, fp.xi, fp.eta, f_zeta, false);
    if ((evf.x - fp.x).norm() > 1e-8 * scale_len)
      throw GeometryError("assemble_coupling: interface surfaces do not coincide");
    const Vec3 n = fp.normal_out;
    const int n_f = static_cast<int>(evf.values.size());
    const int n_s = static_cast<int>(fp.ev->values.size());
    for (int af = 0; af < n_f; ++af) {
      const double Rf = evf.values[af];
      if (Rf == 0.0) continue;
      const int row = fluid_topo.raw_to_glued[evf.raw_indices[af]];
      for (int bs = 0; bs < n_s; ++bs) {
        const double Rs = fp.ev->values[bs];
        if (Rs == 0.0) continue;
        const int colbase = 3 * solid_topo.raw_to_glued[fp.ev->raw_indices[bs]];
        const double m = Rf * Rs * fp.dGamma;
        for (int c = 0; c < 3; ++c) t.add(row, colbase + c, m * n[c]);
      }
    }
  });
  return t;
}

Eigen::VectorXcd assemble_load(
    const NurbsPatch& patch, const MeshTopology& topo, int face,
    const std::function<Complex(const Vec3&, const Vec3&)>& g, int nq) {
  Eigen::VectorXcd F = Eigen::VectorXcd::Zero(topo.n_glued);
  for_each_face_point(patch, topo, face, nq, [&](const FacePoint& fp) {
    // normal out of the scatterer = into the fluid patch at its zeta=0 face
    const Vec3 n_sc = (face == 0) ? Vec3(-fp.normal_out) : fp.normal_out;
    const Complex gv = g(fp.x, n_sc);
    const int n_en = static_cast<int>(fp.ev->values.size());
    for (int a = 0; a < n_en; ++a) {
      if (fp.ev->values[a] == 0.0) continue;
      F[topo.raw_to_glued[fp.ev->raw_indices[a]]] +=
          fp.ev->values[a] * gv * fp.dGamma;
    }
  });
  return F;
}

std::function<Complex(const Vec3&, const Vec3&)> neumann_datum(
    const ScatterProblem& problem) {
  if (problem.kind == BoundaryKind::Manufactured) {
    const double k = problem.k;
    const Vec3 y = problem.source;
    const Complex P = problem.P_inc;
    return [k, y, P](const Vec3& x, const Vec3& n_sc) {
      return -P * analytic::manufactured_flux(k, y, x, n_sc);
    };
  }
  const double k = problem.k;
  const Vec3 d = problem.d_s.normalized();
  const Complex P = problem.P_inc;
  return [k, d, P](const Vec3& x, const Vec3& n_sc) {
    // g = -d p_inc / d n with n out of the exterior fluid domain
    return I_UNIT * k * d.dot(n_sc) * P * std::exp(I_UNIT * k * d.dot(x));
  };
}

// -------------------------------------------------------- angular integrals

AngularIntegrals assemble_angular_integrals(const NurbsPatch& patch,
                                            const MeshTopology& topo,
                                            const coords::ProlateSystem& sys,
                                            double r_a, int nq) {
  AngularIntegrals out;
  out.n = static_cast<int>(topo.kappa_a.size());
  std::array<std::vector<Eigen::Triplet<double>>, 5> trips;

  for_each_face_point(patch, topo, 1, nq, [&](const FacePoint& fp) {
    const coords::ProlatePoint pp = coords::from_cartesian(sys, fp.x);
    if (std::abs(pp.r - r_a) > 1e-8 * r_a)
      throw GeometryError(
          "assemble_angular_integrals: Gamma_a is not a constant-radius surface");
    const auto aj = coords::angular_param_jacobian(sys, fp.x, fp.t_xi, fp.t_eta);
    const double st = std::sin(pp.theta);
    const double ct = std::cos(pp.theta);
    const double w = std::abs(aj.det) * fp.dGamma /
                     (fp.t_xi.cross(fp.t_eta)).norm();  // d th d ph weight

    // face-supported functions and their (theta, phi) derivatives
    const int n_en = static_cast<int>(fp.ev->values.size());
    std::vector<int> pos;
    std::vector<double> R, dth, dph;
    pos.reserve(n_en);
    for (int a = 0; a < n_en; ++a) {
      const int glued = topo.raw_to_glued[fp.ev->raw_indices[a]];
      const int p = topo.kappa_a_pos[glued];
      if (p < 0) continue;
      Eigen::Vector2d gpar(fp.ev->grads_param[a][0], fp.ev->grads_param[a][1]);
      Eigen::Vector2d gang = aj.J3_invT * gpar;
      pos.push_back(p);
      R.push_back(fp.ev->values[a]);
      dth.push_back(gang[0]);
      dph.push_back(gang[1]);
    }
    const size_t nf = pos.size();
    for (size_t a = 0; a < nf; ++a)
      for (size_t b = 0; b < nf; ++b) {
        const double v1 = R[a] * R[b] * st * w;
        const double v2 = dth[a] * dth[b] * st * w;
        const double v3 = dph[a] * dph[b] / st * w;
        const double v4 = dph[a] * dph[b] * ct * ct / st * w;
        const double v5 = R[a] * R[b] * ct * ct * st * w;
        if (!std::isfinite(v1) || !std::isfinite(v2) || !std::isfinite(v3) ||
            !std::isfinite(v4) || !std::isfinite(v5))
          throw GeometryError(
              "assemble_angular_integrals: non-finite integrand sample near pole");
        trips[0].emplace_back(pos[a], pos[b], v1);
        trips[1].emplace_back(pos[a], pos[b], v2);
        trips[2].emplace_back(pos[a], pos[b], v3);
        trips[3].emplace_back(pos[a], pos[b], v4);
        trips[4].emplace_back(pos[a], pos[b], v5);
      }
  });

  for (int i = 0; i < 5; ++i) {
    out.A[i].resize(out.n, out.n);
    out.A[i].setFromTriplets(trips[i].begin(), trips[i].end());
    out.A[i].makeCompressed();
  }
  return out;
}

// ------------------------------------------------------- infinite elements

namespace {

// Radial factors W_alpha(n, m) such that
// B(R_I psi_n, R_J phi_m) = sum_alpha W_alpha(n,m) A^(alpha)_{IJ}.
std::array<Eigen::MatrixXcd, 5> ie_radial_factors(
    const IeContext& ie, const specfun::RadialIntegralTable& rad) {
  const int N = ie.N;
  const double rho1 = ie.rho1(), rho2 = ie.rho2(), rho3 = ie.rho3();
  const double r12 = rho1 * rho1, r32 = rho3 * rho3;
  const bool conj = ie.conjugated();
  if (rad.conjugated != conj)
    throw DomainError("assemble_infinite_elements: radial table conjugation mismatch");
  if (std::abs(rad.rho1 - rho1) > 1e-12 ||
      (!conj && std::abs(rad.rho2 - rho2) > 1e-12))
    throw DomainError("assemble_infinite_elements: radial table rho parameters mismatch");
  if (rad.n_max < 2 * N + 4)
    throw DomainError("assemble_infinite_elements: radial table too small");

  const Eigen::MatrixXcd& D = ie.D;
  const Eigen::MatrixXcd Dt = conj ? ie.D_tilde.conjugate() : ie.D_tilde;
  auto b1 = [&](int n) { return rad.b1_at(n); };
  auto b2 = [&](int n) { return rad.b2_at(n); };

  std::array<Eigen::MatrixXcd, 5> W;
  for (auto& w : W) w = Eigen::MatrixXcd::Zero(N, N);

  const Complex pref =
      conj ? Complex(ie.r_a)
           : ie.r_a * std::exp(-2.0 * I_UNIT * rho2);

  for (int n = 1; n <= N; ++n)
    for (int m = 1; m <= N; ++m) {
      Complex w1 = 0, w2 = 0, w3 = 0, w4 = 0, w5 = 0;
      for (int nt = 1; nt <= N; ++nt)
        for (int mt = 1; mt <= N; ++mt) {
          const Complex dd = Dt(n - 1, nt - 1) * D(m - 1, mt - 1);
          if (dd == Complex(0.0)) continue;
          const int s = nt + mt;
          Complex a1 = 0;
          switch (ie.formulation) {
            case IeFormulation::PGU:
              a1 = -2.0 * rho2 * rho2 * b1(s) -
                   I_UNIT * rho2 * (s + 2.0) * b1(s + 1) +
                   ((nt + 2.0) * mt + r32) * b1(s + 2) +
                   I_UNIT * rho1 * rho3 * (s + 2.0) * b1(s + 3) -
                   r12 * (nt + 2.0) * mt * b1(s + 4);
              w2 += dd * b1(s + 2);
              w3 += dd * b2(s + 1);
              w4 += dd * (-r12) * b2(s + 3);
              w5 += dd * r32 * b1(s + 2);
              break;
            case IeFormulation::BGU:
              a1 = -I_UNIT * rho2 * static_cast<double>(s) * b1(s - 1) +
                   (static_cast<double>(nt) * mt + r32) * b1(s) +
                   I_UNIT * rho1 * rho3 * static_cast<double>(s) * b1(s + 1) -
                   r12 * nt * mt * b1(s + 2);
              if (!(nt == 1 && mt == 1))
                a1 += -2.0 * rho2 * rho2 * b1(s - 2);
              w2 += dd * b1(s);
              w3 += dd * b2(s - 1);
              w4 += dd * (-r12) * b2(s + 1);
              w5 += dd * r32 * b1(s);
              break;
            case IeFormulation::PGC:
              a1 = -I_UNIT * rho2 * (nt - mt + 2.0) * b1(s + 1) +
                   ((nt + 2.0) * mt - r32) * b1(s + 2) +
                   I_UNIT * rho1 * rho3 * (nt - mt + 2.0) * b1(s + 3) -
                   r12 * (nt + 2.0) * mt * b1(s + 4);
              w2 += dd * b1(s + 2);
              w3 += dd * b2(s + 1);
              w4 += dd * (-r12) * b2(s + 3);
              w5 += dd * r32 * b1(s + 2);
              break;
            case IeFormulation::BGC:
              a1 = (static_cast<double>(nt) * mt - r32) * b1(s) -
                   r12 * nt * mt * b1(s + 2);
              if (nt != mt)
                a1 += -I_UNIT * rho2 * static_cast<double>(nt - mt) * b1(s - 1) +
                      I_UNIT * rho1 * rho3 * static_cast<double>(nt - mt) * b1(s + 1);
              w2 += dd * b1(s);
              w3 += dd * b2(s - 1);
              w4 += dd * (-r12) * b2(s + 1);
              w5 += dd * r32 * b1(s);
              break;
          }
          w1 += dd * a1;
        }
      W[0](n - 1, m - 1) = w1 * pref;
      W[1](n - 1, m - 1) = w2 * pref;
      W[2](n - 1, m - 1) = w3 * pref;
      W[3](n - 1, m - 1) = w4 * pref;
      W[4](n - 1, m - 1) = w5 * pref;
      if (ie.bubnov()) {
        // Cauchy principal value boundary term at Gamma_a
        W[0](n - 1, m - 1) +=
            -I_UNIT * rho2 * ie.r_a * D(m - 1, 0) * Dt(n - 1, 0);
      }
    }
  return W;
}

}  // namespace

la::ComplexTripletMatrix assemble_infinite_elements(
    const AngularIntegrals& ang, const IeContext& ie,
    const specfun::RadialIntegralTable& rad, const std::vector<int>& kappa_a,
    int n_fluid) {
  const int N = ie.N;
  const int nk = ang.n;
  if (static_cast<int>(kappa_a.size()) != nk)
    throw DomainError("assemble_infinite_elements: kappa_a size mismatch");
  const auto W = ie_radial_factors(ie, rad);
  const int dim = n_fluid + nk * std::max(N - 1, 0);
  auto dof_of = [&](int order, int pos) {
    return (order == 1) ? kappa_a[pos] : n_fluid + (order - 2) * nk + pos;
  };

  la::ComplexTripletMatrix t(dim, dim);
  // merge the five angular matrices over the union of their patterns
  std::map<std::pair<int, int>, std::array<double, 5>> merged;
  for (int al = 0; al < 5; ++al)
    for (int outer = 0; outer < ang.A[al].outerSize(); ++outer)
      for (Eigen::SparseMatrix<double>::InnerIterator it(ang.A[al], outer); it;
           ++it) {
        auto& slot = merged[{static_cast<int>(it.row()),
                             static_cast<int>(it.col())}];
        slot[al] += it.value();
      }
  for (const auto& [key, a] : merged) {
    const auto [i, j] = key;
    for (int n = 1; n <= N; ++n)
      for (int m = 1; m <= N; ++m) {
        Complex v = 0;
        for (int al = 0; al < 5; ++al) v += W[al](n - 1, m - 1) * a[al];
        t.add(dof_of(n, i), dof_of(m, j), v);
      }
  }
  return t;
}

// --------------------------------------------------------------- full system

GlobalSystem assemble_system(const ScatterProblem& problem,
                             const GeometryBundle& geom, const IeContext& ie,
                             const AssemblyOptions& opt) {
  const bool asi = (problem.kind == BoundaryKind::SSBC ||
                    problem.kind == BoundaryKind::NNBC);
  if (asi && (!geom.solid || !geom.solid_topo))
    throw DomainError("assemble_system: ASI problem requires a solid patch");
  if (problem.kind == BoundaryKind::NNBC && (!geom.interior || !geom.interior_topo))
    throw DomainError("assemble_system: NNBC requires an interior fluid patch");

  GlobalSystem sys;
  sys.layout.n_fluid = geom.fluid_topo.n_glued;
  sys.layout.n_kappa_a = static_cast<int>(geom.fluid_topo.kappa_a.size());
  sys.layout.N = ie.N;
  sys.layout.n_solid = asi ? geom.solid_topo->n_glued : 0;
  sys.layout.n_interior =
      (problem.kind == BoundaryKind::NNBC) ? geom.interior_topo->n_glued : 0;
  const int dim = sys.layout.total();
  sys.A = la::ComplexTripletMatrix(dim, dim);
  sys.F = Eigen::VectorXcd::Zero(dim);

  const double omega = problem.omega();
  const Complex fluid_scale =
      asi ? Complex(1.0 / (problem.mat.rho_f * omega * omega)) : Complex(1.0);

  // exterior fluid + infinite elements
  {
    la::ComplexTripletMatrix helm = assemble_helmholtz(
        geom.fluid, geom.fluid_topo, problem.k, opt.nq, opt.n_threads);
    sys.A.append(helm, 0, 0, fluid_scale);
    const coords::ProlateSystem psys{geom.upsilon};
    AngularIntegrals ang = assemble_angular_integrals(geom.fluid, geom.fluid_topo,
                                                      psys, geom.r_a, opt.nq);
    const auto rad = radial_integrals_for(ie);
    // kappa_a ids are already global fluid dofs
    la::ComplexTripletMatrix iem = assemble_infinite_elements(
        ang, ie, rad, geom.fluid_topo.kappa_a, sys.layout.n_fluid);
    sys.A.append(iem, 0, 0, fluid_scale);
  }

  if (!asi) {
    // rigid/manufactured: Neumann load on the scatterer surface (zeta = 0)
    Eigen::VectorXcd F = assemble_load(geom.fluid, geom.fluid_topo, 0,
                                       neumann_datum(problem), opt.nq);
    sys.F.head(sys.layout.n_fluid) = F;
    return sys;
  }

  // solid block
  {
    la::ComplexTripletMatrix K = assemble_elasticity(
        *geom.solid, *geom.solid_topo, problem.mat, omega, opt.nq, opt.n_threads);
    sys.A.append(K, sys.layout.solid_offset(), sys.layout.solid_offset());
  }

  const double k = problem.k;
  const Vec3 d = problem.d_s.normalized();
  const Complex P = problem.P_inc;

  // Gamma_1 coupling and load (fluid zeta=0 face, solid zeta=1 face)
  if (opt.include_coupling) {
    la::ComplexTripletMatrix C =
        assemble_coupling(geom.fluid, geom.fluid_topo, 0, *geom.solid,
                          *geom.solid_topo, 1, opt.nq);
    sys.A.append(C, 0, sys.layout.solid_offset());
    // transposed block: p v . n term
    la::ComplexTripletMatrix Ct(C.n_cols, C.n_rows);
    for (size_t idx = 0; idx < C.vals.size(); ++idx)
      Ct.add(C.cols[idx], C.rows[idx], C.vals[idx]);
    sys.A.append(Ct, sys.layout.solid_offset(), 0);
  }
  {
    // L_ASI = int_Gamma1 [ (1/(rho omega^2)) q1 dp_inc/dn - p_inc v . n ]
    Eigen::VectorXcd Ff = Eigen::VectorXcd::Zero(sys.layout.n_fluid);
    Eigen::VectorXcd Fs = Eigen::VectorXcd::Zero(3 * sys.layout.n_solid);
    const double f_zeta0 = geom.fluid.kv[2].front();
    for_each_face_point(*geom.solid, *geom.solid_topo, 1, opt.nq,
                        [&](const FacePoint& fp) {
      const Vec3 n = fp.normal_out;  // out of the solid
      const Complex pinc = P * std::exp(I_UNIT * k * d.dot(fp.x));
      const Complex dpinc_dn = I_UNIT * k * d.dot(n) * pinc;
      BasisEval evf = nurbs_basis_3d(geom.fluid, fp.xi, fp.eta, f_zeta0, false);
      for (size_t a = 0; a < evf.values.size(); ++a) {
        if (evf.values[a] == 0.0) continue;
        Ff[geom.fluid_topo.raw_to_glued[evf.raw_indices[a]]] +=
            fluid_scale * evf.values[a] * dpinc_dn * fp.dGamma;
      }
      for (size_t b = 0; b < fp.ev->values.size(); ++b) {
        if (fp.ev->values[b] == 0.0) continue;
        const int base = 3 * geom.solid_topo->raw_to_glued[fp.ev->raw_indices[b]];
        for (int c = 0; c < 3; ++c)
          Fs[base + c] -= pinc * fp.ev->values[b] * n[c] * fp.dGamma;
      }
    });
    sys.F.head(sys.layout.n_fluid) += Ff;
    sys.F.segment(sys.layout.solid_offset(), 3 * sys.layout.n_solid) += Fs;
  }

  if (problem.kind == BoundaryKind::NNBC) {
    // interior fluid block (same k and rho_f as the exterior)
    la::ComplexTripletMatrix helm2 = assemble_helmholtz(
        *geom.interior, *geom.interior_topo, problem.k, opt.nq, opt.n_threads);
    sys.A.append(helm2, sys.layout.interior_offset(), sys.layout.interior_offset(),
                 fluid_scale);
    if (opt.include_coupling) {
      // Gamma_2: interior fluid zeta=1 face, solid zeta=0 face
      la::ComplexTripletMatrix C2 =
          assemble_coupling(*geom.interior, *geom.interior_topo, 1, *geom.solid,
                            *geom.solid_topo, 0, opt.nq);
      sys.A.append(C2, sys.layout.interior_offset(), sys.layout.solid_offset());
      la::ComplexTripletMatrix C2t(C2.n_cols, C2.n_rows);
      for (size_t idx = 0; idx < C2.vals.size(); ++idx)
        C2t.add(C2.cols[idx], C2.rows[idx], C2.vals[idx]);
      sys.A.append(C2t, sys.layout.solid_offset(), sys.layout.interior_offset());
    }
  }
  return sys;
}

}  // namespace scatter::assembly
