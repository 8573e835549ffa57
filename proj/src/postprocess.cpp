// SPDX-License-Identifier: Apache-2.0
#include "scatter/postprocess.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "scatter/quadrature.hpp"

namespace scatter::post {

using assembly::FacePoint;
using assembly::gauss_rule;
using assembly::QuadratureRule;
using nurbs::BasisEval;
using nurbs::MeshTopology;
using nurbs::NurbsPatch;

double target_strength(Complex p0, Complex P_inc) {
  if (std::abs(P_inc) == 0.0)
    throw DomainError("target_strength: P_inc must be nonzero");
  return 20.0 * std::log10(std::abs(p0) / std::abs(P_inc));
}

double sav_index(double L_gamma_a, double area_gamma1, double vol_omega_a) {
  if (!(vol_omega_a > 0.0)) throw DomainError("sav_index: volume must be positive");
  return 0.5 * L_gamma_a * area_gamma1 / vol_omega_a;
}

analytic::FieldValue DiscreteField::eval_param(double xi, double eta,
                                               double zeta) const {
  const BasisEval ev = nurbs_basis_3d(*patch, xi, eta, zeta, true);
  analytic::FieldValue out;
  out.p = 0.0;
  out.grad.setZero();
  for (size_t a = 0; a < ev.values.size(); ++a) {
    const Complex c = coeffs[topo->raw_to_glued[ev.raw_indices[a]]];
    out.p += c * ev.values[a];
    out.grad += c * Eigen::Vector3cd(ev.grads_phys[a][0], ev.grads_phys[a][1],
                                     ev.grads_phys[a][2]);
  }
  return out;
}

namespace {

// shared volume quadrature loop
template <typename Fn>
void for_each_volume_point(const NurbsPatch& patch, const MeshTopology& topo,
                           int nq, Fn&& fn) {
  const int nqd[3] = {nq > 0 ? nq : patch.kv[0].degree + 1,
                      nq > 0 ? nq : patch.kv[1].degree + 1,
                      nq > 0 ? nq : patch.kv[2].degree + 1};
  const QuadratureRule q[3] = {gauss_rule(nqd[0]), gauss_rule(nqd[1]),
                               gauss_rule(nqd[2])};
  for (int e = 0; e < topo.num_elements(); ++e) {
    const auto box = topo.element_box(patch, e);
    const double jj = 0.125 * (box[0][1] - box[0][0]) * (box[1][1] - box[1][0]) *
                      (box[2][1] - box[2][0]);
    for (int c = 0; c < nqd[2]; ++c)
      for (int b = 0; b < nqd[1]; ++b)
        for (int a = 0; a < nqd[0]; ++a) {
          const double xi =
              box[0][0] + 0.5 * (box[0][1] - box[0][0]) * (q[0].points[a] + 1.0);
          const double eta =
              box[1][0] + 0.5 * (box[1][1] - box[1][0]) * (q[1].points[b] + 1.0);
          const double zeta =
              box[2][0] + 0.5 * (box[2][1] - box[2][0]) * (q[2].points[c] + 1.0);
          const BasisEval ev = nurbs_basis_3d(patch, xi, eta, zeta, true);
          const double w = q[0].weights[a] * q[1].weights[b] * q[2].weights[c] *
                           jj * std::abs(ev.detJ);
          fn(ev, w);
        }
  }
}

struct FieldSample {
  Complex p;
  Eigen::Vector3cd grad;
};

FieldSample discrete_sample(const BasisEval& ev, const MeshTopology& topo,
                            const Eigen::VectorXcd& coeffs) {
  FieldSample s;
  s.p = 0.0;
  s.grad.setZero();
  for (size_t a = 0; a < ev.values.size(); ++a) {
    const Complex c = coeffs[topo.raw_to_glued[ev.raw_indices[a]]];
    s.p += c * ev.values[a];
    s.grad += c * Eigen::Vector3cd(ev.grads_phys[a][0], ev.grads_phys[a][1],
                                   ev.grads_phys[a][2]);
  }
  return s;
}

}  // namespace

double energy_norm_fluid(const NurbsPatch& patch, const MeshTopology& topo,
                         const Eigen::VectorXcd& coeffs, double k, int nq) {
  double acc = 0.0;
  for_each_volume_point(patch, topo, nq, [&](const BasisEval& ev, double w) {
    const FieldSample s = discrete_sample(ev, topo, coeffs);
    acc += (s.grad.squaredNorm() + k * k * std::norm(s.p)) * w;
  });
  return std::sqrt(acc);
}

double energy_norm_fluid_exact(const NurbsPatch& patch, const MeshTopology& topo,
                               const ExactField& exact, double k, int nq) {
  double acc = 0.0;
  for_each_volume_point(patch, topo, nq, [&](const BasisEval& ev, double w) {
    const analytic::FieldValue f = exact(ev.x);
    acc += (f.grad.squaredNorm() + k * k * std::norm(f.p)) * w;
  });
  return std::sqrt(acc);
}

RelErrors fluid_relative_errors(const NurbsPatch& patch, const MeshTopology& topo,
                                const Eigen::VectorXcd& coeffs,
                                const ExactField& exact, double k, int nq) {
  double e_num = 0.0, e_den = 0.0, h_num = 0.0, h_den = 0.0;
  for_each_volume_point(patch, topo, nq, [&](const BasisEval& ev, double w) {
    const FieldSample s = discrete_sample(ev, topo, coeffs);
    const analytic::FieldValue f = exact(ev.x);
    const Eigen::Vector3cd dg = s.grad - f.grad;
    const Complex dp = s.p - f.p;
    e_num += (dg.squaredNorm() + k * k * std::norm(dp)) * w;
    e_den += (f.grad.squaredNorm() + k * k * std::norm(f.p)) * w;
    h_num += (dg.squaredNorm() + std::norm(dp)) * w;
    h_den += (f.grad.squaredNorm() + std::norm(f.p)) * w;
  });
  RelErrors out;
  out.energy_exact = std::sqrt(e_den);
  out.h1_exact = std::sqrt(h_den);
  out.energy_rel = std::sqrt(e_num / e_den);
  out.h1_rel = std::sqrt(h_num / h_den);
  return out;
}

double energy_norm_solid(const NurbsPatch& patch, const MeshTopology& topo,
                         const Eigen::VectorXcd& coeffs3,
                         const analytic::MaterialParams& mat, double omega,
                         int nq) {
  const double lam = mat.lambda(), mu = mat.mu();
  double acc = 0.0;
  for_each_volume_point(patch, topo, nq, [&](const BasisEval& ev, double w) {
    Eigen::Matrix3cd gradu = Eigen::Matrix3cd::Zero();  // du_i/dx_j
    Eigen::Vector3cd u = Eigen::Vector3cd::Zero();
    for (size_t a = 0; a < ev.values.size(); ++a) {
      const int g = topo.raw_to_glued[ev.raw_indices[a]];
      for (int i = 0; i < 3; ++i) {
        const Complex c = coeffs3[3 * g + i];
        u[i] += c * ev.values[a];
        for (int j = 0; j < 3; ++j) gradu(i, j) += c * ev.grads_phys[a][j];
      }
    }
    const Eigen::Matrix3cd eps = 0.5 * (gradu + gradu.transpose());
    const Complex tr = eps.trace();
    // eps_ij c_ijkl conj(eps_kl) = lambda |tr|^2 + 2 mu sum |eps_ij|^2
    double dens = lam * std::norm(tr);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dens += 2.0 * mu * std::norm(eps(i, j));
    dens += mat.rho_s * omega * omega * u.squaredNorm();
    acc += dens * w;
  });
  return std::sqrt(acc);
}

double energy_norm_coupled(double fluid_ext, double solid, double fluid_int,
                           double rho_f, double omega) {
  const double wgt = 1.0 / (rho_f * omega * omega);
  return std::sqrt(wgt * fluid_ext * fluid_ext + solid * solid +
                   wgt * fluid_int * fluid_int);
}

namespace {

template <typename Kernel>
Complex kirchhoff_integrate(const NurbsPatch& patch, const MeshTopology& topo,
                            int face, int nq, const KirchhoffData& data,
                            Kernel&& kernel) {
  Complex acc = 0.0;
  assembly::for_each_face_point(
      patch, topo, face, nq,
      [&](const FacePoint& fp) {
        // n_sc: out of the scatterer = into the exterior fluid
        const Vec3 n_sc = (face == 0) ? Vec3(-fp.normal_out) : fp.normal_out;
        const Complex pv = data.p(fp);
        const Complex dv = data.dpdn(fp, n_sc);
        acc += kernel(fp.x, n_sc, pv, dv) * fp.dGamma;
      },
      /*with_phys_grads=*/true);
  return acc;
}

}  // namespace

Complex kirchhoff_near(const NurbsPatch& patch, const MeshTopology& topo,
                       int face, double k, const KirchhoffData& data,
                       const Vec3& x, int nq) {
  return kirchhoff_integrate(
      patch, topo, face, nq, data,
      [&](const Vec3& y, const Vec3& n, Complex p, Complex dpdn) {
        const Vec3 d = x - y;
        const double R = d.norm();
        const Complex Phi = std::exp(I_UNIT * k * R) / (4.0 * PI * R);
        const double dRdn = -d.dot(n) / R;
        const Complex dPhi = Phi / R * (I_UNIT * k * R - 1.0) * dRdn;
        return p * dPhi - Phi * dpdn;
      });
}

Complex kirchhoff_far(const NurbsPatch& patch, const MeshTopology& topo,
                      int face, double k, const KirchhoffData& data,
                      const Vec3& xhat, int nq) {
  const Vec3 d = xhat.normalized();
  return kirchhoff_integrate(
      patch, topo, face, nq, data,
      [&](const Vec3& y, const Vec3& n, Complex p, Complex dpdn) {
        const Complex phase = std::exp(-I_UNIT * k * d.dot(y));
        return -(I_UNIT * k * p * d.dot(n) + dpdn) * phase / (4.0 * PI);
      });
}

KirchhoffData analytic_traces(const ExactField& field) {
  KirchhoffData data;
  data.p = [field](const FacePoint& fp) { return field(fp.x).p; };
  data.dpdn = [field](const FacePoint& fp, const Vec3& n_sc) {
    return n_sc.cast<Complex>().dot(field(fp.x).grad);
  };
  return data;
}

KirchhoffData discrete_traces(const DiscreteField& field) {
  const MeshTopology* topo = field.topo;
  const Eigen::VectorXcd coeffs = field.coeffs;
  KirchhoffData data;
  data.p = [topo, coeffs](const FacePoint& fp) {
    Complex p = 0.0;
    for (size_t a = 0; a < fp.ev->values.size(); ++a)
      p += coeffs[topo->raw_to_glued[fp.ev->raw_indices[a]]] * fp.ev->values[a];
    return p;
  };
  data.dpdn = [topo, coeffs](const FacePoint& fp, const Vec3& n_sc) {
    Eigen::Vector3cd g = Eigen::Vector3cd::Zero();
    for (size_t a = 0; a < fp.ev->values.size(); ++a) {
      const Complex c = coeffs[topo->raw_to_glued[fp.ev->raw_indices[a]]];
      g += c * Eigen::Vector3cd(fp.ev->grads_phys[a][0], fp.ev->grads_phys[a][1],
                                fp.ev->grads_phys[a][2]);
    }
    return n_sc.cast<Complex>().dot(g);
  };
  return data;
}

Eigen::VectorXcd best_approximation(const NurbsPatch& patch,
                                    const MeshTopology& topo,
                                    const ExactField& exact, int nq) {
  const int n = topo.n_glued;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  for_each_volume_point(patch, topo, nq, [&](const BasisEval& ev, double w) {
    const analytic::FieldValue f = exact(ev.x);
    const int n_en = static_cast<int>(ev.values.size());
    for (int a = 0; a < n_en; ++a) {
      const int ga = topo.raw_to_glued[ev.raw_indices[a]];
      const Eigen::Vector3cd gva(ev.grads_phys[a][0], ev.grads_phys[a][1],
                                 ev.grads_phys[a][2]);
      rhs[ga] += (gva.dot(f.grad) + f.p * ev.values[a]) * w;
      for (int b = 0; b < n_en; ++b) {
        const double gdot = ev.grads_phys[a][0] * ev.grads_phys[b][0] +
                            ev.grads_phys[a][1] * ev.grads_phys[b][1] +
                            ev.grads_phys[a][2] * ev.grads_phys[b][2];
        trips.emplace_back(ga, topo.raw_to_glued[ev.raw_indices[b]],
                           (gdot + ev.values[a] * ev.values[b]) * w);
      }
    }
  });
  Eigen::SparseMatrix<double> G(n, n);
  G.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(G);
  if (llt.info() != Eigen::Success)
    throw SingularityError("best_approximation: Gram matrix is not SPD");
  Eigen::VectorXcd out(n);
  const Eigen::VectorXd xr = llt.solve(rhs.real().eval());
  const Eigen::VectorXd xi = llt.solve(rhs.imag().eval());
  for (int i = 0; i < n; ++i) out[i] = Complex(xr[i], xi[i]);
  return out;
}

}  // namespace scatter::post
