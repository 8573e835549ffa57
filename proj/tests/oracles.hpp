// SPDX-License-Identifier: Apache-2.0
// Test-only reference computations, independent of the library code paths
// they are used to check.
#ifndef SCATTER_TESTS_ORACLES_HPP
#define SCATTER_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>

#include "scatter/common.hpp"

namespace oracles {

using scatter::Complex;
using scatter::I_UNIT;
using scatter::PI;

/// Seeded RNG honoring SCATTER_SEED.
inline std::mt19937_64 make_rng(uint64_t fallback = 0x5eed5eedULL) {
  if (const char* s = std::getenv("SCATTER_SEED")) {
    return std::mt19937_64(std::strtoull(s, nullptr, 10));
  }
  return std::mt19937_64(fallback);
}

/// Composite 16-point Gauss integration with panels no longer than max_panel.
inline Complex panel_gauss(const std::function<Complex(double)>& f, double a,
                           double b, double max_panel) {
  static const double gx[8] = {0.0950125098376374, 0.2816035507792589,
                               0.4580167776572274, 0.6178762444026438,
                               0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
  static const double gw[8] = {0.1894506104550685, 0.1826034150449236,
                               0.1691565193950025, 0.1495959888165767,
                               0.1246289712555339, 0.0951585116824928,
                               0.0622535239386479, 0.0271524594117541};
  const int n_panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
  const double h = (b - a) / n_panels;
  Complex sum = 0.0;
  for (int p = 0; p < n_panels; ++p) {
    const double c = a + (p + 0.5) * h;
    const double r = 0.5 * h;
    for (int i = 0; i < 8; ++i) {
      sum += gw[i] * r * (f(c + r * gx[i]) + f(c - r * gx[i]));
    }
  }
  return sum;
}

/// tail integral int_R^inf rho^{-n} e^{-z rho} d rho by repeated integration
/// by parts; asymptotic in 1/(zR), so summation stops at the smallest term.
inline Complex ibp_tail_monomial(int n, Complex z, double R) {
  Complex sum = 0.0;
  Complex fac = 1.0 / z;
  double poch = 1.0;
  double rpow = std::pow(R, -n);
  double last = 1e300;
  for (int k = 0; k < 60; ++k) {
    const Complex term = poch * rpow * fac;
    const double m = std::abs(term);
    if (m > last) break;  // asymptotic series turned around
    sum += term;
    if (m < 1e-17 * std::abs(sum)) break;
    last = m;
    poch *= -(n + k);
    rpow /= R;
    fac /= z;
  }
  return std::exp(-z * R) * sum;
}

/// E_n(z) = int_1^inf e^{-z rho}/rho^n, Re(z) >= 0, z != 0, by direct
/// quadrature plus an analytic tail.
inline Complex oracle_en(int n, Complex z) {
  double R;
  bool need_tail;
  if (z.real() > 0.05) {
    // choose R so the decay bound e^{-Re(z) R} R^{-n} is below 1e-18 and
    // skip the tail altogether
    R = 2.0;
    while (z.real() * R + n * std::log(R) < 42.0 && R < 1e7) R *= 1.25;
    need_tail = false;
  } else {
    // oscillatory: quadrature to a radius where the IBP expansion converges
    R = std::max(400.0, (n + 40.0) / std::abs(z));
    need_tail = true;
  }
  const double osc = std::abs(z.imag());
  const double panel = (osc > 0.5) ? PI / (2.0 * osc) : 1.0;
  auto f = [&](double rho) { return std::exp(-z * rho) * std::pow(rho, -n); };
  // fine panels near rho = 1 where rho^{-n} is steep
  const double split = std::min(4.0, R);
  Complex val = panel_gauss(f, 1.0, split, std::min(panel, 3.0 / (n + 4)));
  if (R > split) val += panel_gauss(f, split, R, panel);
  if (need_tail) val += ibp_tail_monomial(n, z, R);
  return val;
}

/// Unconjugated radial integrals by quadrature: w = e^{2 i rho2 rho}.
inline Complex oracle_b1_unconj(int n, double rho2) {
  return oracle_en(n, Complex(0.0, -2.0 * rho2));
}

inline Complex oracle_b2_unconj(int n, double rho1, double rho2) {
  const Complex z(0.0, -2.0 * rho2);
  const double R = std::max(400.0, (n + 42.0) / std::abs(z));
  const double panel = PI / (2.0 * std::max(0.5, 2.0 * rho2));
  auto f = [&](double rho) {
    return std::exp(-z * rho) /
           ((rho * rho - rho1 * rho1) * std::pow(rho, n - 1));
  };
  Complex val = panel_gauss(f, 1.0, 4.0, std::min(panel, 3.0 / (n + 5))) +
                panel_gauss(f, 4.0, R, panel);
  // tail: 1/(rho^2 - rho1^2) = sum_j rho1^{2j} rho^{-2j-2}
  double r2j = 1.0;
  for (int j = 0; j < 6; ++j) {
    val += r2j * ibp_tail_monomial(n + 1 + 2 * j, z, R);
    r2j *= rho1 * rho1;
  }
  return val;
}

inline double oracle_b2_conj(int n, double rho1) {
  const double R = 400.0;
  auto f = [&](double rho) {
    return Complex(1.0 /
                   ((rho * rho - rho1 * rho1) * std::pow(rho, n - 1)));
  };
  Complex val = panel_gauss(f, 1.0, 4.0, 3.0 / (n + 5)) +
                panel_gauss(f, 4.0, R, 1.0);
  double r2j = 1.0;
  double tail = 0.0;
  for (int j = 0; j < 6; ++j) {
    tail += r2j * std::pow(R, -(n + 2 * j)) / (n + 2 * j);
    r2j *= rho1 * rho1;
  }
  return val.real() + tail;
}

}  // namespace oracles

#endif
