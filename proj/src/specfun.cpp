// SPDX-License-Identifier: Apache-2.0
#include "scatter/specfun.hpp"

#include <cmath>
#include <limits>

namespace scatter::specfun {

namespace {
constexpr double EULER_GAMMA = 0.57721566490153286060651209008;
}

LegendreEval legendre_p(int n, double x) {
  if (n < 0) throw DomainError("legendre_p: n must be nonnegative");
  if (std::abs(x) > 1.0) throw DomainError("legendre_p: |x| > 1");
  if (n == 0) return {1.0, 0.0};
  double pm1 = 1.0;
  double p = x;
  for (int m = 1; m < n; ++m) {
    double pp1 = ((2 * m + 1) * x * p - m * pm1) / (m + 1);
    pm1 = p;
    p = pp1;
  }
  // (1-x^2) P_n' = n (P_{n-1} - x P_n); endpoint limit P_n'(+-1) = (+-1)^{n+1} n(n+1)/2
  double omx2 = (1.0 - x) * (1.0 + x);
  double deriv;
  if (omx2 < 1e-12) {
    double sgn = (x > 0.0) ? 1.0 : ((n % 2 == 0) ? -1.0 : 1.0);
    deriv = sgn * 0.5 * n * (n + 1);
  } else {
    deriv = n * (pm1 - x * p) / omx2;
  }
  return {p, deriv};
}

SphBesselEval sph_bessel(int n, double x) {
  if (n < 0) throw DomainError("sph_bessel: n must be nonnegative");
  if (!(x > 0.0)) throw DomainError("sph_bessel: x must be positive");

  const double j0 = std::sin(x) / x;
  const double y0 = -std::cos(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const double y1 = -std::cos(x) / (x * x) - std::sin(x) / x;

  double jn, jnm1;  // j_n and j_{n-1}
  if (n == 0) {
    jn = j0;
    jnm1 = 0.0;  // unused
  } else {
    // Miller's algorithm: downward recurrence from n_start, normalize by j_0.
    // The start index sits past the n ~ x turning point so the seed's
    // irregular component has decayed below working precision.
    const int n_start =
        std::max(n, static_cast<int>(std::ceil(x))) + 15 +
        static_cast<int>(std::ceil(15.0 * std::cbrt(std::max(1.0, x))));
    double fp1 = 0.0;          // f_{m+1}
    double f = 1e-30;          // f_m, arbitrary seed at m = n_start
    double fn = 0.0, fnm1 = 0.0;
    for (int m = n_start; m >= 1; --m) {
      double fm1 = (2.0 * m + 1.0) / x * f - fp1;  // f_{m-1} from f_m, f_{m+1}
      fp1 = f;
      f = fm1;
      if (m - 1 == n) fn = f;
      if (m - 1 == n - 1) fnm1 = f;
      if (std::abs(f) > 1e250) {  // rescale to avoid overflow
        fp1 /= 1e250;
        f /= 1e250;
        fn /= 1e250;
        fnm1 /= 1e250;
      }
    }
    const double scale = j0 / f;  // f now holds the unnormalized j_0
    jn = fn * scale;
    jnm1 = fnm1 * scale;
  }

  // y_n by stable upward recurrence.
  double yn, ynm1;
  if (n == 0) {
    yn = y0;
    ynm1 = 0.0;
  } else {
    double ya = y0, yb = y1;
    for (int m = 1; m < n; ++m) {
      double yc = (2.0 * m + 1.0) / x * yb - ya;
      ya = yb;
      yb = yc;
    }
    yn = yb;
    ynm1 = ya;
  }

  double jp, yp;
  if (n == 0) {
    jp = -j1;
    yp = -y1;
  } else {
    jp = jnm1 - (n + 1.0) / x * jn;
    yp = ynm1 - (n + 1.0) / x * yn;
  }
  return {jn, yn, jp, yp};
}

SphHankelEval sph_hankel1(int n, double x) {
  SphBesselEval b = sph_bessel(n, x);
  return {Complex(b.j, b.y), Complex(b.jp, b.yp)};
}

namespace {

Complex en_series(int n, Complex z) {
  // A&S 5.1.12. The logarithmic term is skipped once (n-1) ln|z| - ln (n-1)!
  // puts it far below the working precision.
  Complex sum = 0.0;
  if (n > 1) sum = 1.0 / static_cast<double>(n - 1);  // m = 0 term of -sum
  // -sum_{m>=0, m != n-1} (-z)^m / ((m-n+1) m!)
  Complex pow_term = 1.0;  // (-z)^m / m!
  int small_count = 0;
  bool converged = false;
  for (int m = 1; m <= 500; ++m) {
    pow_term *= -z / static_cast<double>(m);
    if (m == n - 1) continue;
    Complex term = -pow_term / static_cast<double>(m - n + 1);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) {
      if (++small_count >= 3) {
        converged = true;
        break;
      }
    } else {
      small_count = 0;
    }
  }
  if (!converged && std::abs(z) > 0.0)
    throw ConvergenceError("exp_integral_en: series did not converge");
  double log_mag = (n - 1) * std::log(std::abs(z)) - std::lgamma(n);
  if (std::abs(z) > 0.0 && log_mag > -45.0) {
    double psi = -EULER_GAMMA;
    for (int m = 1; m <= n - 1; ++m) psi += 1.0 / m;
    Complex pref = 1.0;
    for (int m = 1; m <= n - 1; ++m) pref *= -z / static_cast<double>(m);
    sum += pref * (-std::log(z) + psi);
  }
  return sum;
}

Complex en_contfrac(int n, Complex z) {
  // Modified Lentz evaluation of the Press continued fraction.
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  Complex b = z + static_cast<double>(n);
  Complex c = 1.0 / tiny;
  Complex d = 1.0 / b;
  Complex h = d;
  for (int i = 1; i <= 300; ++i) {
    double a = -static_cast<double>(i) * (n - 1.0 + i);
    b += 2.0;
    d = a * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    Complex del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h * std::exp(-z);
  }
  throw ConvergenceError("exp_integral_en: continued fraction did not converge");
}

}  // namespace

Complex exp_integral_en(int n, Complex z) {
  if (n < 1) throw DomainError("exp_integral_en: n must be positive");
  if (z.real() < 0.0) throw DomainError("exp_integral_en: Re(z) must be >= 0");
  if (z == Complex(0.0, 0.0)) {
    if (n == 1) throw SingularityError("exp_integral_en: E_1(0) diverges");
    return 1.0 / static_cast<double>(n - 1);
  }
  // Ties at |z| = 1 go to the series.
  if (std::abs(z) <= 1.0) return en_series(n, z);
  return en_contfrac(n, z);
}

Complex exp_integral_en_series(int n, Complex z) {
  if (n < 1) throw DomainError("exp_integral_en: n must be positive");
  if (z.real() < 0.0) throw DomainError("exp_integral_en: Re(z) must be >= 0");
  if (z == Complex(0.0, 0.0)) {
    if (n == 1) throw SingularityError("exp_integral_en: E_1(0) diverges");
    return 1.0 / static_cast<double>(n - 1);
  }
  return en_series(n, z);
}

Complex exp_integral_en_contfrac(int n, Complex z) {
  if (n < 1) throw DomainError("exp_integral_en: n must be positive");
  if (z.real() < 0.0) throw DomainError("exp_integral_en: Re(z) must be >= 0");
  if (z == Complex(0.0, 0.0))
    throw DomainError("exp_integral_en_contfrac: z = 0 not supported");
  return en_contfrac(n, z);
}

Complex RadialIntegralTable::b1_at(int n) const {
  if (n < 1 || n > n_max) throw DomainError("RadialIntegralTable: b1 index out of range");
  if (conjugated && n == 1)
    throw SingularityError("RadialIntegralTable: conjugated b1[1] diverges");
  return b1[static_cast<size_t>(n)];
}

Complex RadialIntegralTable::b2_at(int n) const {
  if (n < 1 || n > n_max) throw DomainError("RadialIntegralTable: b2 index out of range");
  return b2[static_cast<size_t>(n)];
}

RadialIntegralTable radial_integrals(double rho1, double rho2, bool conjugated,
                                     int n_max) {
  if (!(rho1 >= 0.0 && rho1 < 1.0))
    throw GeometryError("radial_integrals: need 0 <= rho1 < 1 (r_a > Upsilon)");
  if (!conjugated && !(rho2 > 0.0))
    throw DomainError("radial_integrals: rho2 must be positive (unconjugated)");
  if (n_max < 1) throw DomainError("radial_integrals: n_max must be >= 1");

  RadialIntegralTable t;
  t.rho1 = rho1;
  t.rho2 = rho2;
  t.conjugated = conjugated;
  t.n_max = n_max;
  t.b1.assign(static_cast<size_t>(n_max) + 1, Complex(0.0));
  t.b2.assign(static_cast<size_t>(n_max) + 1, Complex(0.0));

  const double r1sq = rho1 * rho1;
  if (conjugated) {
    for (int n = 2; n <= n_max; ++n) t.b1[n] = 1.0 / static_cast<double>(n - 1);
    for (int n = 1; n <= n_max; ++n) {
      Complex sum = 1.0 / static_cast<double>(n);
      double pw = 1.0;
      for (int j = 1; j <= 2000; ++j) {
        pw *= r1sq;
        if (pw == 0.0) break;
        Complex term = pw / static_cast<double>(2 * j + n);
        sum += term;
        if (std::abs(term) < 1e-15 * std::abs(sum)) break;
      }
      t.b2[n] = sum;
    }
  } else {
    const Complex z(0.0, -2.0 * rho2);
    for (int n = 1; n <= n_max; ++n) t.b1[n] = exp_integral_en(n, z);
    for (int n = 1; n <= n_max; ++n) {
      Complex sum = exp_integral_en(n + 1, z);
      double pw = 1.0;
      for (int j = 1; j <= 2000; ++j) {
        pw *= r1sq;
        if (pw == 0.0) break;
        Complex term = pw * exp_integral_en(2 * j + n + 1, z);
        sum += term;
        if (std::abs(term) < 1e-15 * std::abs(sum)) break;
      }
      t.b2[n] = sum;
    }
  }
  return t;
}

}  // namespace scatter::specfun
