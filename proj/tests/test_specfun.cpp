// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "scatter/specfun.hpp"

using namespace scatter;
using namespace scatter::specfun;

TEST_CASE("legendre basics") {
  CHECK(legendre_p(0, 0.7).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(legendre_p(1, 0.3).value == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(legendre_p(4, 1.0).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(legendre_p(3, 1.5), DomainError);
  // |P_n(+-1)| = 1
  for (int n = 0; n <= 12; ++n) {
    CHECK(std::abs(std::abs(legendre_p(n, 1.0).value) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(legendre_p(n, -1.0).value) - 1.0) < 1e-14);
  }
  // derivative against central differences
  for (int n : {2, 5, 9}) {
    for (double x : {-0.83, -0.2, 0.41, 0.77}) {
      const double h = 1e-6;
      const double fd =
          (legendre_p(n, x + h).value - legendre_p(n, x - h).value) / (2 * h);
      CHECK(legendre_p(n, x).deriv == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

namespace {
// cancellation-free j_1 reference
double j1_ref(double x) {
  if (x < 0.5) {
    // x/3 (1 - x^2/10 + x^4/280 - x^6/15120 + ...)
    const double x2 = x * x;
    return x / 3.0 *
           (1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0);
  }
  return std::sin(x) / (x * x) - std::cos(x) / x;
}
}  // namespace

TEST_CASE("spherical bessel closed forms and Wronskian") {
  for (double x : {1e-3, 0.1, 1.0, 7.3, 40.0, 1000.0}) {
    const auto b0 = sph_bessel(0, x);
    CHECK(b0.j == doctest::Approx(std::sin(x) / x).epsilon(1e-14));
    CHECK(b0.y == doctest::Approx(-std::cos(x) / x).epsilon(1e-14));
    const auto b1 = sph_bessel(1, x);
    CHECK(b1.j == doctest::Approx(j1_ref(x)).epsilon(1e-13));
    CHECK(b1.y == doctest::Approx(-std::cos(x) / (x * x) - std::sin(x) / x)
                      .epsilon(1e-13));
  }
  // Wronskian j_n y_n' - j_n' y_n = 1/x^2
  for (int n = 0; n <= 30; n += 3) {
    for (double x : {0.1, 0.9, 3.7, 12.0, 55.0, 100.0}) {
      const auto b = sph_bessel(n, x);
      const double w = b.j * b.yp - b.jp * b.y;
      CHECK(w == doctest::Approx(1.0 / (x * x)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(sph_bessel(2, 0.0), DomainError);
  CHECK_THROWS_AS(sph_bessel(2, -1.0), DomainError);
}

TEST_CASE("spherical hankel") {
  for (double x : {0.4, 2.0, 9.1}) {
    const auto h0 = sph_hankel1(0, x);
    const Complex expect = -I_UNIT * std::exp(I_UNIT * x) / x;
    CHECK(std::abs(h0.h - expect) < 1e-14 * std::abs(expect));
    const auto b = sph_bessel(4, x);
    const auto h = sph_hankel1(4, x);
    CHECK(h.h == Complex(b.j, b.y));
    CHECK(h.hp == Complex(b.jp, b.yp));
  }
  // large-argument asymptotics |h_n(x)| ~ |(-i)^{n+1} e^{ix}/x|, x = 1e3
  for (int n : {0, 3, 8}) {
    const double x = 1000.0;
    const Complex asym = std::pow(-I_UNIT, n + 1) * std::exp(I_UNIT * x) / x;
    const auto h = sph_hankel1(n, x);
    CHECK(std::abs(std::abs(h.h) - std::abs(asym)) < 1e-3 * std::abs(asym));
  }
}

TEST_CASE("exponential integral: special values and errors") {
  for (int n : {2, 3, 7}) {
    CHECK(exp_integral_en(n, Complex(0.0)) ==
          Complex(1.0 / (n - 1.0)));
  }
  CHECK_THROWS_AS(exp_integral_en(1, Complex(0.0)), SingularityError);
  CHECK_THROWS_AS(exp_integral_en(2, Complex(-0.5, 1.0)), DomainError);
}

TEST_CASE("exponential integral vs quadrature oracle") {
  // spec case: tail bound chosen so e^{-Re(z) R}/R^n < 1e-14
  const Complex z(1.2, -0.7);
  const Complex ref = oracles::oracle_en(3, z);
  const Complex val = exp_integral_en(3, z);
  CHECK(std::abs(val - ref) < 1e-10 * std::abs(ref));

  // a few more points on both branches
  for (Complex zz : {Complex(0.3, 0.2), Complex(0.0, -4.0), Complex(2.5, 3.0),
                     Complex(0.9, 0.0), Complex(0.0, -0.9)}) {
    for (int n : {1, 2, 5, 12}) {
      const Complex r = oracles::oracle_en(n, zz);
      const Complex v = exp_integral_en(n, zz);
      CHECK(std::abs(v - r) < 1e-9 * std::abs(r));
    }
  }
}

TEST_CASE("exponential integral recurrence and branch overlap") {
  // recurrence E_{n+1}(z) = (e^{-z} - z E_n(z))/n
  auto rng = oracles::make_rng(11);
  std::uniform_real_distribution<double> mag(0.2, 50.0), arg(-0.5 * PI, 0.5 * PI);
  for (int trial = 0; trial < 40; ++trial) {
    const double m = mag(rng), a = arg(rng);
    const Complex z = m * Complex(std::cos(a), std::sin(a));
    for (int n = 1; n <= 20; n += 4) {
      const Complex lhs = exp_integral_en(n + 1, z);
      const Complex rhs = (std::exp(-z) - z * exp_integral_en(n, z)) / double(n);
      CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));
    }
  }
  // series and continued fraction agree on the overlap band
  for (double m : {0.5, 0.8, 1.0, 1.3, 2.0}) {
    for (double a : {-1.2, -0.3, 0.0, 0.7, 1.5}) {
      const Complex z = m * Complex(std::cos(a), std::sin(a));
      if (z.real() < 0.0) continue;
      for (int n = 1; n <= 12; ++n) {
        const Complex ser = exp_integral_en_series(n, z);
        const Complex cf = exp_integral_en_contfrac(n, z);
        CHECK(std::abs(ser - cf) < 1e-11 * std::abs(cf));
        const Complex ref = oracles::oracle_en(n, z);
        CHECK(std::abs(exp_integral_en(n, z) - ref) < 1e-10 * std::abs(ref));
      }
    }
  }
}

TEST_CASE("radial integrals: conjugated closed forms") {
  const auto t0 = radial_integrals(0.0, 0.0, true, 12);
  for (int n = 2; n <= 12; ++n)
    CHECK(t0.b1_at(n) == Complex(1.0 / (n - 1.0)));
  for (int n = 1; n <= 12; ++n)
    CHECK(std::abs(t0.b2_at(n) - Complex(1.0 / n)) < 1e-15);
  CHECK_THROWS_AS(t0.b1_at(1), SingularityError);

  const auto t = radial_integrals(0.55, 0.0, true, 10);
  for (int n = 1; n <= 10; ++n) {
    const double ref = oracles::oracle_b2_conj(n, 0.55);
    CHECK(std::abs(t.b2_at(n).real() - ref) < 1e-10 * std::abs(ref));
  }
}

TEST_CASE("radial integrals: unconjugated") {
  {
    const auto t = radial_integrals(0.0, 1.7, false, 10);
    for (int n = 1; n <= 9; ++n) {
      // rho1 = 0: b2[n] = E_{n+1}(-2 i rho2) = b1[n+1]
      CHECK(std::abs(t.b2_at(n) - t.b1_at(n + 1)) < 1e-14 * std::abs(t.b1_at(n + 1)));
    }
  }
  {
    const auto t = radial_integrals(0.3, 2.0, false, 8);
    const Complex ref = oracles::oracle_b2_unconj(3, 0.3, 2.0);
    CHECK(std::abs(t.b2_at(3) - ref) < 1e-8 * std::abs(ref));
  }
  CHECK_THROWS_AS(radial_integrals(1.0, 2.0, false, 8), GeometryError);
}
