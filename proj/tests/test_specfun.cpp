#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bspade/specfun.hpp"
#include "oracles.hpp"

using namespace bspade::specfun;


TEST_CASE("hermite: low orders and series oracle")
{
  CHECK(hermite(0, 3.7) == 1.0);
  CHECK(hermite(2, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  const double want = oracle::hermite_series(7, 0.9);
  CHECK(want == doctest::Approx(205.0434432).epsilon(1e-12));
  CHECK(std::abs(hermite(7, 0.9) - want) / std::abs(want) < 1e-12);
  CHECK_THROWS_AS(hermite(-1, 0.0), std::invalid_argument);
}

TEST_CASE("hermite: no overflow up to n = 60, |x| <= 10")
{
  for (int n = 0; n <= 60; n += 5)
    for (double x : {-10.0, -3.3, 0.0, 2.5, 10.0})
      CHECK(std::isfinite(hermite(n, x)));
}

TEST_CASE("laguerre: low orders and series oracle")
{
  CHECK(laguerre(0, 5, 2.3) == 1.0);
  CHECK(laguerre(1, 1, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(oracle::laguerre_series(3, 2, 1.5) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(std::abs(laguerre(3, 2, 1.5) - 0.0625) < 1e-12 * 0.0625 + 1e-16);
  CHECK_THROWS(laguerre(-1, 0, 1.0));
}

TEST_CASE("recurrences match explicit series for orders <= 20, |x| <= 5")
{
  oracle::Gen gen(11);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = gen.integer(0, 20);
    const double x = gen.uniform(-5.0, 5.0);
    const double h = oracle::hermite_series(n, x);
    CHECK(std::abs(hermite(n, x) - h) <= 1e-12 * std::max(1.0, std::abs(h)) * (1 + n));
    const int a = gen.integer(-n, 6);
    const double l = oracle::laguerre_series(n, a, x);
    // Series terms cancel heavily at large x; scale tolerance by term magnitude.
    double scale = 0.0;
    for (int j = 0; j <= n; ++j)
      scale += std::pow(std::abs(x), j) / oracle::factorial(j) * oracle::binomial(n + std::abs(a) + 6, n - j);
    CHECK(std::abs(laguerre(n, a, x) - l) <= 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("hg1d: values, parity and orthonormality")
{
  CHECK(hg1d(0, 0.0) == doctest::Approx(std::pow(std::numbers::pi, -0.25)).epsilon(1e-15));
  CHECK(hg1d(0, 0.0) == doctest::Approx(0.7511).epsilon(1e-4));
  CHECK(hg1d(1, 0.0) == 0.0);
  for (int m = 0; m <= 12; ++m)
    for (double x : {0.1, 0.7, 1.9, 3.4, 6.0})
      CHECK(hg1d(m, -x) == doctest::Approx((m % 2 ? -1.0 : 1.0) * hg1d(m, x)).epsilon(1e-14));

  for (int m = 0; m <= 10; ++m)
    for (int n = 0; n <= 10; ++n) {
      const double ip = oracle::trapezoid([&](double x) { return hg1d(m, x) * hg1d(n, x); });
      CHECK(std::abs(ip - (m == n ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("hg1d: matches series oracle and batched evaluation")
{
  std::vector<double> all;
  for (double x : {-4.0, -0.3, 0.0, 1.2, 7.5}) {
    hg1d_all(30, x, all);
    REQUIRE(all.size() == 31);
    for (int m = 0; m <= 20; ++m) {
      CHECK(std::abs(hg1d(m, x) - oracle::hg_series(m, x)) < 1e-12);
      CHECK(std::abs(all[m] - hg1d(m, x)) < 1e-12);
    }
  }
  // High orders take the normalized-recurrence path; it must stay bounded.
  for (double x : {0.0, 5.0, 14.0, 30.0})
    CHECK(std::abs(hg1d(200, x)) < 1.0);
}

TEST_CASE("gauss_hermite: rule invariants and monomial exactness")
{
  for (int n : {1, 2, 5, 16, 40, 100}) {
    const auto rule = gauss_hermite(n);
    REQUIRE(rule.size() == std::size_t(n));
    for (std::size_t i = 0; i < rule.size(); ++i) {
      CHECK(rule.weights[i] > 0.0);
      if (i > 0)
        CHECK(rule.nodes[i] > rule.nodes[i - 1]);
    }
    // int x^k e^{-x^2} = Gamma((k+1)/2) for even k, 0 for odd k.
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) {
        s += rule.weights[i] * std::pow(rule.nodes[i], k);
        scale += rule.weights[i] * std::pow(std::abs(rule.nodes[i]), k);
      }
      const double exact = (k % 2) ? 0.0 : std::tgamma(0.5 * (k + 1));
      CHECK(std::abs(s - exact) <= 1e-12 * scale);
    }
  }
  CHECK_THROWS(gauss_hermite(0));
  CHECK_THROWS_AS(gauss_hermite(kMaxHermiteOrder + 1), std::out_of_range);
}

TEST_CASE("gauss_legendre: exact on polynomials")
{
  const auto rule = gauss_legendre(12);
  for (int k = 0; k <= 23; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      s += rule.weights[i] * std::pow(rule.nodes[i], k);
    const double exact = (k % 2) ? 0.0 : 2.0 / (k + 1);
    CHECK(std::abs(s - exact) < 1e-14);
  }
}

TEST_CASE("quad_overlap: normalization, orthonormality and trapezoid oracle")
{
  CHECK(quad_overlap(0, 0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (int m = 0; m <= 10; ++m)
    for (int n = 0; n <= 10; ++n)
      CHECK(std::abs(quad_overlap(m, n, 0.0) - (m == n ? 1.0 : 0.0)) < 1e-12);
  for (int m : {0, 1, 4, 9})
    for (int n : {0, 2, 5, 10})
      for (double s : {-2.0, 0.4, 1.7}) {
        // quad_overlap integrates hg(m,x) hg(n,x-s).
        CHECK(std::abs(quad_overlap(m, n, s) - oracle::overlap_trapezoid(m, n, -s)) < 1e-11);
      }
  CHECK_THROWS_AS(quad_overlap(3, 4, 0.5, 16), std::invalid_argument);
  CHECK_THROWS_AS(quad_overlap(200, 200, 0.5, 420), std::out_of_range);
}
