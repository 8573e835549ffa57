// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_SPECFUN_HPP
#define SCATTER_SPECFUN_HPP

#include <vector>

#include "scatter/common.hpp"

namespace scatter::specfun {

struct LegendreEval {
  double value;
  double deriv;
};

/// Legendre polynomial P_n(x) and derivative P_n'(x) on [-1,1] via the
/// three-term recursion (n+1)P_{n+1} = (2n+1)x P_n - n P_{n-1}.
LegendreEval legendre_p(int n, double x);

struct SphBesselEval {
  double j;
  double y;
  double jp;
  double yp;
};

/// Spherical Bessel functions j_n(x), y_n(x) and first derivatives, x > 0.
/// j_n by Miller's downward recurrence normalized against j_0, y_n upward.
SphBesselEval sph_bessel(int n, double x);

struct SphHankelEval {
  Complex h;
  Complex hp;
};

/// Spherical Hankel function of the first kind, h_n = j_n + i y_n.
SphHankelEval sph_hankel1(int n, double x);

/// Exponential integral E_n(z) = int_1^inf e^{-z rho} / rho^n d rho,
/// Re(z) >= 0, (n,z) != (1,0). Series branch for |z| <= 1, modified-Lentz
/// continued fraction for |z| > 1.
Complex exp_integral_en(int n, Complex z);

/// Individual evaluation branches, exposed for cross-verification on the
/// overlap band.
Complex exp_integral_en_series(int n, Complex z);
Complex exp_integral_en_contfrac(int n, Complex z);

/// Radial integrals feeding the infinite-element bilinear forms.
///   b1[n] = int_1^inf w(rho) / rho^n d rho
///   b2[n] = int_1^inf w(rho) / ((rho^2 - rho1^2) rho^{n-1}) d rho
/// with w = e^{2 i rho2 rho} (unconjugated) or w = 1 (conjugated).
struct RadialIntegralTable {
  std::vector<Complex> b1;  // index 0 unused; valid n = 1..n_max
  std::vector<Complex> b2;
  double rho1 = 0.0;
  double rho2 = 0.0;
  bool conjugated = false;
  int n_max = 0;

  Complex b1_at(int n) const;
  Complex b2_at(int n) const;
};

/// rho1 = Upsilon/r_a in [0,1), rho2 = k*r_a (> 0 for unconjugated).
RadialIntegralTable radial_integrals(double rho1, double rho2, bool conjugated,
                                     int n_max);

}  // namespace scatter::specfun

#endif
