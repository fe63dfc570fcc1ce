#pragma once

// Reference implementations used only by the tests. Each one takes a route
// independent of the library code it checks.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

inline double factorial(int n)
{
  double f = 1.0;
  for (int i = 2; i <= n; ++i)
    f *= i;
  return f;
}

inline double binomial(int n, int k)
{
  if (k < 0 || k > n)
    return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i)
    b = b * (n - k + i) / i;
  return b;
}

// H_n(x) = n! sum_j (-1)^j (2x)^(n-2j) / (j! (n-2j)!)
inline double hermite_series(int n, double x)
{
  double s = 0.0;
  for (int j = 0; 2 * j <= n; ++j)
    s += (j % 2 ? -1.0 : 1.0) * std::pow(2.0 * x, n - 2 * j) / (factorial(j) * factorial(n - 2 * j));
  return factorial(n) * s;
}

// L_m^a(x) = sum_j (-1)^j C(m+a, m-j) x^j / j!, for m + a >= 0.
inline double laguerre_series(int m, int a, double x)
{
  double s = 0.0;
  for (int j = 0; j <= m; ++j) {
    // C(m+a, m-j) with a possibly negative, as a falling product.
    double c = 1.0;
    const int r = m - j;
    for (int i = 1; i <= r; ++i)
      c = c * (m + a - r + i) / i;
    s += (j % 2 ? -1.0 : 1.0) * c * std::pow(x, j) / factorial(j);
  }
  return s;
}

inline double hg_series(int m, double x)
{
  const double norm = std::sqrt(std::pow(2.0, m) * factorial(m) * std::sqrt(std::numbers::pi));
  return hermite_series(m, x) * std::exp(-0.5 * x * x) / norm;
}

// Trapezoid rule on a wide uniform grid; spectrally accurate for the smooth
// Gaussian-decaying integrands used here.
template <class F>
double trapezoid(F&& f, double lo = -20.0, double hi = 20.0, int n = 8000)
{
  const double h = (hi - lo) / n;
  double s = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i)
    s += f(lo + i * h);
  return s * h;
}

// <m| HG_n(x + shift)>
inline double overlap_trapezoid(int m, int n, double shift)
{
  return trapezoid([&](double x) { return hg_series(m, x) * hg_series(n, x + shift); });
}

inline double schmidt_sq(int m, int n, double g)
{
  const double c00 = 4.0 * g / ((1.0 + g) * (1.0 + g));
  const double r = std::abs((1.0 - g) / (1.0 + g));
  const double c = c00 * std::pow(r, m + n);
  return c * c;
}

// Small deterministic generator for property tests.
class Gen
{
 public:
  explicit Gen(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next()
  {
    s_ ^= s_ << 13;
    s_ ^= s_ >> 7;
    s_ ^= s_ << 17;
    return s_;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * double(next() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + int(next() % std::uint64_t(hi - lo + 1)); }

 private:
  std::uint64_t s_;
};

} // namespace oracle
