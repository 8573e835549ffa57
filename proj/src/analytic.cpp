// SPDX-License-Identifier: Apache-2.0
#include "scatter/analytic.hpp"

#include <cmath>

#include "scatter/specfun.hpp"

namespace scatter::analytic {

using specfun::sph_bessel;
using specfun::sph_hankel1;

double MaterialParams::c1() const { return std::sqrt((lambda() + 2.0 * mu()) / rho_s); }
double MaterialParams::c2() const { return std::sqrt(mu() / rho_s); }

void MaterialParams::validate() const {
  if (!(nu > 0.0 && nu < 0.5)) throw DomainError("MaterialParams: need 0 < nu < 0.5");
  if (!(E > 0.0 && rho_s > 0.0 && rho_f > 0.0 && c_f > 0.0))
    throw DomainError("MaterialParams: moduli, densities and speeds must be positive");
}

MaterialParams ihlenburg_material() {
  MaterialParams m;
  m.E = 2.07e11;
  m.nu = 0.3;
  m.rho_s = 7669.0;
  m.rho_f = 1000.0;
  m.c_f = 1524.0;
  return m;
}

namespace {

// Incremental Legendre evaluation P_n(u), P_n'(u) along a mode sweep.
struct LegendreSweep {
  double u;
  double pm1 = 0.0, pn = 1.0;  // P_{n-1}, P_n with n starting at 0
  int n = 0;

  double value() const { return pn; }
  double deriv() const {
    const double omu2 = (1.0 - u) * (1.0 + u);
    if (omu2 < 1e-12) {
      const double sgn = (u > 0.0) ? 1.0 : ((n % 2 == 0) ? -1.0 : 1.0);
      return sgn * 0.5 * n * (n + 1);
    }
    return n * (pm1 - u * pn) / omu2;
  }
  void advance() {
    const double pp1 = ((2 * n + 1) * u * pn - n * pm1) / (n + 1);
    pm1 = pn;
    pn = pp1;
    ++n;
  }
};

struct SeriesAccumulator {
  Complex f = 0.0, fr = 0.0, fu = 0.0;
  int small_count = 0;

  // returns true when converged per the 3-consecutive-small-terms rule
  bool add(Complex df, Complex dfr, Complex dfu, double rel_tol) {
    f += df;
    fr += dfr;
    fu += dfu;
    if (std::abs(df) <= rel_tol * std::abs(f) &&
        std::abs(dfr) <= rel_tol * std::abs(fr)) {
      if (++small_count >= 3) return true;
    } else {
      small_count = 0;
    }
    return false;
  }
};

}  // namespace

RigidSphereSolution::RigidSphereSolution(double k, Complex P_inc, double R,
                                         Vec3 d_s, SeriesControl ctl)
    : k_(k), R_(R), P_(P_inc), d_s_(d_s.normalized()), ctl_(ctl) {
  if (!(k > 0.0 && R > 0.0)) throw DomainError("RigidSphereSolution: k, R > 0");
}

Complex RigidSphereSolution::coef(int n) const {
  while (static_cast<int>(coef_.size()) <= n) {
    const int m = static_cast<int>(coef_.size());
    const auto b = sph_bessel(m, k_ * R_);
    const auto h = sph_hankel1(m, k_ * R_);
    Complex in = std::pow(I_UNIT, m);
    coef_.push_back(-P_ * in * (2.0 * m + 1.0) * b.jp / h.hp);
  }
  return coef_[n];
}

FieldValue RigidSphereSolution::field(const Vec3& x) const {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("rigid sphere field: x = 0");
  const Vec3 xhat = x / r;
  const double u = std::clamp(d_s_.dot(xhat), -1.0, 1.0);

  LegendreSweep leg{u};
  SeriesAccumulator acc;
  const int n_stop = (ctl_.n_trunc >= 0) ? ctl_.n_trunc : ctl_.n_max;
  bool converged = (ctl_.n_trunc >= 0);
  for (int n = 0; n <= n_stop; ++n) {
    const Complex c = coef(n);
    const auto h = sph_hankel1(n, k_ * r);
    const double Pn = leg.value(), dPn = leg.deriv();
    const bool done = acc.add(c * Pn * h.h, c * Pn * k_ * h.hp, c * dPn * h.h,
                              ctl_.rel_tol);
    if (done && ctl_.n_trunc < 0) {
      converged = true;
      break;
    }
    leg.advance();
  }
  if (!converged)
    throw ConvergenceError("rigid sphere series did not converge within n_max");

  FieldValue out;
  out.p = acc.f;
  const Eigen::Vector3d grad_u = (d_s_ - u * xhat) / r;
  out.grad = acc.fr * xhat.cast<Complex>() + acc.fu * grad_u.cast<Complex>();
  return out;
}

Complex RigidSphereSolution::farfield(const Vec3& xhat) const {
  const double u = std::clamp(d_s_.dot(xhat.normalized()), -1.0, 1.0);
  LegendreSweep leg{u};
  Complex f = 0.0;
  int small_count = 0;
  const int n_stop = (ctl_.n_trunc >= 0) ? ctl_.n_trunc : ctl_.n_max;
  bool converged = (ctl_.n_trunc >= 0);
  for (int n = 0; n <= n_stop; ++n) {
    // lim r e^{-ikr} h_n(kr) = (-i)^{n+1} / k
    const Complex lim = std::pow(-I_UNIT, n + 1) / k_;
    const Complex term = coef(n) * leg.value() * lim;
    f += term;
    if (std::abs(term) <= ctl_.rel_tol * std::abs(f)) {
      if (++small_count >= 3 && ctl_.n_trunc < 0) {
        converged = true;
        break;
      }
    } else {
      small_count = 0;
    }
    leg.advance();
  }
  if (!converged)
    throw ConvergenceError("rigid sphere far-field series did not converge");
  return f;
}

SphericalFieldValue rigid_sphere_pressure(double k, Complex P_inc, double R,
                                          double r, double theta,
                                          const SeriesControl& ctl) {
  RigidSphereSolution sol(k, P_inc, R, Vec3(0, 0, 1), ctl);
  const Vec3 x(r * std::sin(theta), 0.0, r * std::cos(theta));
  FieldValue fv = sol.field(x);
  SphericalFieldValue out;
  out.p = fv.p;
  const Vec3 er = x / r;
  const Vec3 et(std::cos(theta), 0.0, -std::sin(theta));
  out.dp_dr = er.cast<Complex>().dot(fv.grad);
  out.dp_dtheta = r * et.cast<Complex>().dot(fv.grad);
  return out;
}

Complex rigid_sphere_farfield(double k, Complex P_inc, double R, double theta,
                              const SeriesControl& ctl) {
  RigidSphereSolution sol(k, P_inc, R, Vec3(0, 0, 1), ctl);
  return sol.farfield(Vec3(std::sin(theta), 0.0, std::cos(theta)));
}

namespace {

// Shell displacement functions after the exact 3D solution; A^(1) = j_n,
// A^(2) = y_n.
double shell_A(int i, int n, double x) {
  const auto b = sph_bessel(n, x);
  return (i == 1) ? b.j : b.y;
}

double shell_B(int row, int i, int n, double x, double ratio_b2_b1) {
  // row in {1,2,3,4}; the b2/b1 ratio enters only B1
  const double An = shell_A(i, n, x);
  const double An1 = shell_A(i, n + 1, x);
  switch (row) {
    case 1:
      return (n * n - n - 0.5 * ratio_b2_b1 * ratio_b2_b1 * x * x) * An + 2.0 * x * An1;
    case 2:
      return n * (n + 1.0) * ((n - 1.0) * An - x * An1);
    case 3:
      return (n - 1.0) * An - x * An1;
    default:
      return (n * n - 1.0 - 0.5 * x * x) * An + x * An1;
  }
}

double det3_scaled(double m[3][3], double* scale_out) {
  double scale = 1.0;
  for (int r = 0; r < 3; ++r) {
    double mx = std::max({std::abs(m[r][0]), std::abs(m[r][1]), std::abs(m[r][2])});
    if (mx > 0.0) {
      for (int c = 0; c < 3; ++c) m[r][c] /= mx;
      scale *= mx;
    }
  }
  const double d = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                   m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (scale_out) *scale_out = scale;
  return d * scale;
}

double det4_scaled(double m[4][4], double* scale_out) {
  double scale = 1.0;
  for (int r = 0; r < 4; ++r) {
    double mx = 0.0;
    for (int c = 0; c < 4; ++c) mx = std::max(mx, std::abs(m[r][c]));
    if (mx > 0.0) {
      for (int c = 0; c < 4; ++c) m[r][c] /= mx;
      scale *= mx;
    }
  }
  double d = 0.0;
  for (int c = 0; c < 4; ++c) {
    double minor[3][3];
    for (int r = 1; r < 4; ++r) {
      int cc = 0;
      for (int c2 = 0; c2 < 4; ++c2) {
        if (c2 == c) continue;
        minor[r - 1][cc++] = m[r][c2];
      }
    }
    const double sign = (c % 2 == 0) ? 1.0 : -1.0;
    d += sign * m[0][c] * det3_scaled(minor, nullptr);
  }
  if (scale_out) *scale_out = scale;
  return d * scale;
}

}  // namespace

ShellMode shell_mode(const MaterialParams& mat, double k, double R1, double R0,
                     int n) {
  mat.validate();
  if (!(R1 < R0 && R1 > 0.0)) throw DomainError("shell_mode: need 0 < R1 < R0");
  if (!(k > 0.0)) throw DomainError("shell_mode: k > 0");
  const double omega = k * mat.c_f;
  const double b1 = omega / mat.c1();
  const double b2 = omega / mat.c2();
  const double ratio = b2 / b1;
  const double mu = mat.mu();
  const double pref = R0 * R0 / (2.0 * mu);

  ShellMode out;
  {
    const auto h = sph_hankel1(n, k * R0);
    out.z_n = I_UNIT * mat.rho_f * mat.c_f * h.h / h.hp;
  }

  Eigen::Vector4d C = Eigen::Vector4d::Zero();
  double det, scale;
  if (n == 0) {
    double m[3][3];  // only a 2x2 is needed; reuse det3 with identity padding
    m[0][0] = shell_B(1, 1, 0, b1 * R0, ratio);
    m[0][1] = shell_B(1, 2, 0, b1 * R0, ratio);
    m[0][2] = 0.0;
    m[1][0] = shell_B(1, 1, 0, b1 * R1, ratio);
    m[1][1] = shell_B(1, 2, 0, b1 * R1, ratio);
    m[1][2] = 0.0;
    m[2][0] = 0.0;
    m[2][1] = 0.0;
    m[2][2] = 1.0;
    double mm[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) mm[r][c] = m[r][c];
    det = det3_scaled(mm, &scale);
    if (std::abs(det) < 1e-300 * std::max(scale, 1.0))
      throw SingularityError("shell_mode: in-vacuo resonance (singular mode determinant)");
    C[0] = pref * shell_B(1, 2, 0, b1 * R1, ratio) / det;
    C[2] = -pref * shell_B(1, 1, 0, b1 * R1, ratio) / det;
  } else {
    auto fill = [&](double m[4][4]) {
      const double xs[2] = {R0, R1};
      for (int r = 0; r < 2; ++r) {
        m[r][0] = shell_B(1, 1, n, b1 * xs[r], ratio);
        m[r][1] = shell_B(2, 1, n, b2 * xs[r], ratio);
        m[r][2] = shell_B(1, 2, n, b1 * xs[r], ratio);
        m[r][3] = shell_B(2, 2, n, b2 * xs[r], ratio);
        m[r + 2][0] = shell_B(3, 1, n, b1 * xs[r], ratio);
        m[r + 2][1] = shell_B(4, 1, n, b2 * xs[r], ratio);
        m[r + 2][2] = shell_B(3, 2, n, b1 * xs[r], ratio);
        m[r + 2][3] = shell_B(4, 2, n, b2 * xs[r], ratio);
      }
    };
    double m[4][4];
    fill(m);
    det = det4_scaled(m, &scale);
    if (std::abs(det) < 1e-300 * std::max(scale, 1.0))
      throw SingularityError("shell_mode: in-vacuo resonance (singular mode determinant)");
    // Cramer: numerators are cofactor determinants of the system M C = pref e1
    for (int col = 0; col < 4; ++col) {
      double mc[4][4];
      fill(mc);
      mc[0][col] = pref;
      mc[1][col] = 0.0;
      mc[2][col] = 0.0;
      mc[3][col] = 0.0;
      C[col] = det4_scaled(mc, nullptr) / det;
    }
  }
  out.C = C;
  out.det = det;

  // Z_n = R0 / (-i omega [C1 D1(b1 R0) + C2 D2(b2 R0) + C3 D1'(b1 R0) + C4 D2'(b2 R0)])
  auto D1 = [&](int i, double x) {
    return n * shell_A(i, n, x) - x * shell_A(i, n + 1, x);
  };
  auto D2 = [&](int i, double x) { return n * (n + 1.0) * shell_A(i, n, x); };
  const double denom_r = C[0] * D1(1, b1 * R0) + C[1] * D2(1, b2 * R0) +
                         C[2] * D1(2, b1 * R0) + C[3] * D2(2, b2 * R0);
  out.Z_n = R0 / (-I_UNIT * omega * denom_r);
  return out;
}

ElasticShellSolution::ElasticShellSolution(double k, Complex P_inc, double R1,
                                           double R0, MaterialParams mat,
                                           Vec3 d_s, SeriesControl ctl)
    : rigid_(k, P_inc, R0, d_s, ctl),
      k_(k),
      R1_(R1),
      R0_(R0),
      P_(P_inc),
      mat_(std::move(mat)),
      d_s_(d_s.normalized()),
      ctl_(ctl) {}

Complex ElasticShellSolution::coef(int n) const {
  while (static_cast<int>(coef_.size()) <= n) {
    const int m = static_cast<int>(coef_.size());
    const ShellMode mode = shell_mode(mat_, k_, R1_, R0_, m);
    const auto h = sph_hankel1(m, k_ * R0_);
    const Complex in = std::pow(I_UNIT, m);
    const Complex pref =
        P_ * mat_.rho_f * mat_.c_f / ((k_ * R0_) * (k_ * R0_));
    coef_.push_back(pref * in * (2.0 * m + 1.0) /
                    (h.hp * h.hp * (mode.Z_n + mode.z_n)));
  }
  return coef_[n];
}

FieldValue ElasticShellSolution::field(const Vec3& x) const {
  FieldValue out = rigid_.field(x);
  const double r = x.norm();
  const Vec3 xhat = x / r;
  const double u = std::clamp(d_s_.dot(xhat), -1.0, 1.0);

  LegendreSweep leg{u};
  SeriesAccumulator acc;
  const int n_stop = (ctl_.n_trunc >= 0) ? ctl_.n_trunc : ctl_.n_max;
  bool converged = (ctl_.n_trunc >= 0);
  for (int n = 0; n <= n_stop; ++n) {
    const Complex c = coef(n);
    const auto h = sph_hankel1(n, k_ * r);
    const bool done = acc.add(c * leg.value() * h.h, c * leg.value() * k_ * h.hp,
                              c * leg.deriv() * h.h, ctl_.rel_tol);
    if (done && ctl_.n_trunc < 0) {
      converged = true;
      break;
    }
    leg.advance();
  }
  if (!converged)
    throw ConvergenceError("elastic shell series did not converge within n_max");
  out.p += acc.f;
  const Eigen::Vector3d grad_u = (d_s_ - u * xhat) / r;
  out.grad += acc.fr * xhat.cast<Complex>() + acc.fu * grad_u.cast<Complex>();
  return out;
}

Complex ElasticShellSolution::farfield(const Vec3& xhat) const {
  Complex f = rigid_.farfield(xhat);
  const double u = std::clamp(d_s_.dot(xhat.normalized()), -1.0, 1.0);
  LegendreSweep leg{u};
  int small_count = 0;
  const int n_stop = (ctl_.n_trunc >= 0) ? ctl_.n_trunc : ctl_.n_max;
  bool converged = (ctl_.n_trunc >= 0);
  Complex s = 0.0;
  for (int n = 0; n <= n_stop; ++n) {
    const Complex lim = std::pow(-I_UNIT, n + 1) / k_;
    const Complex term = coef(n) * leg.value() * lim;
    s += term;
    if (std::abs(term) <= ctl_.rel_tol * (std::abs(s) + std::abs(f))) {
      if (++small_count >= 3 && ctl_.n_trunc < 0) {
        converged = true;
        break;
      }
    } else {
      small_count = 0;
    }
    leg.advance();
  }
  if (!converged)
    throw ConvergenceError("elastic shell far-field series did not converge");
  return f + s;
}

SphericalFieldValue elastic_shell_pressure(double k, Complex P_inc, double R1,
                                           double R0, const MaterialParams& mat,
                                           double r, double theta,
                                           const SeriesControl& ctl) {
  ElasticShellSolution sol(k, P_inc, R1, R0, mat, Vec3(0, 0, 1), ctl);
  const Vec3 x(r * std::sin(theta), 0.0, r * std::cos(theta));
  FieldValue fv = sol.field(x);
  SphericalFieldValue out;
  out.p = fv.p;
  const Vec3 er = x / r;
  const Vec3 et(std::cos(theta), 0.0, -std::sin(theta));
  out.dp_dr = er.cast<Complex>().dot(fv.grad);
  out.dp_dtheta = r * et.cast<Complex>().dot(fv.grad);
  return out;
}

FieldValue manufactured_field(double k, const Vec3& y, const Vec3& x) {
  const Vec3 d = x - y;
  const double R = d.norm();
  if (!(R > 0.0)) throw DomainError("manufactured_field: x == y");
  FieldValue out;
  out.p = std::exp(I_UNIT * k * R) / (4.0 * PI * R);
  out.grad = out.p * (I_UNIT * k - 1.0 / R) * d.cast<Complex>() / R;
  return out;
}

Complex manufactured_farfield(double k, const Vec3& y, const Vec3& xhat) {
  return std::exp(-I_UNIT * k * xhat.normalized().dot(y)) / (4.0 * PI);
}

Complex manufactured_flux(double k, const Vec3& y, const Vec3& x, const Vec3& n) {
  return n.cast<Complex>().dot(manufactured_field(k, y, x).grad);
}

}  // namespace scatter::analytic
