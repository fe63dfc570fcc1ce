#include "bspade/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bspade::specfun {

namespace {

constexpr double kPiQuarterInv = 0.7511255444649425; // pi^{-1/4}

// Normalized Hermite polynomials p_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x),
// i.e. hg1d without the Gaussian envelope.
double normalized_hermite(int n, double x)
{
  double p_prev = 0.0;
  double p = kPiQuarterInv;
  for (int k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * x * p - std::sqrt(double(k) / (k + 1)) * p_prev;
    p_prev = p;
    p = next;
  }
  return p;
}

} // namespace

double hermite(int n, double x)
{
  if (n < 0)
    throw std::invalid_argument("hermite: negative order " + std::to_string(n));
  if (n == 0)
    return 1.0;
  double h_prev = 1.0;
  double h = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * h - 2.0 * k * h_prev;
    h_prev = h;
    h = next;
  }
  return h;
}

double laguerre(int m, int alpha, double x)
{
  if (m < 0)
    throw std::invalid_argument("laguerre: negative order " + std::to_string(m));
  if (m == 0)
    return 1.0;
  const double a = alpha;
  double l_prev = 1.0;
  double l = 1.0 + a - x;
  for (int k = 1; k < m; ++k) {
    const double next = ((2.0 * k + 1.0 + a - x) * l - (k + a) * l_prev) / (k + 1.0);
    l_prev = l;
    l = next;
  }
  return l;
}

double hg_log_norm(int m)
{
  return -0.5 * (m * std::numbers::ln2 + std::lgamma(m + 1.0) + 0.5 * std::log(std::numbers::pi));
}

double hg1d(int m, double x)
{
  if (m < 0)
    throw std::invalid_argument("hg1d: negative order " + std::to_string(m));
  // Raw H_m stays finite for the orders and arguments we care about; past
  // that fall back to the normalized recurrence.
  if (m <= 120 && std::abs(x) <= 12.0)
    return hermite(m, x) * std::exp(hg_log_norm(m) - 0.5 * x * x);
  return normalized_hermite(m, x) * std::exp(-0.5 * x * x);
}

void hg1d_all(int max_m, double x, std::vector<double>& out)
{
  if (max_m < 0)
    throw std::invalid_argument("hg1d_all: negative order");
  out.resize(static_cast<std::size_t>(max_m) + 1);
  double p_prev = 0.0;
  double p = kPiQuarterInv * std::exp(-0.5 * x * x);
  out[0] = p;
  for (int k = 0; k < max_m; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * x * p - std::sqrt(double(k) / (k + 1)) * p_prev;
    p_prev = p;
    p = next;
    out[k + 1] = p;
  }
}

QuadratureRule gauss_hermite(int n)
{
  if (n < 1 || n > kMaxHermiteOrder)
    throw std::out_of_range("gauss_hermite: order " + std::to_string(n) + " unavailable (1.."
                            + std::to_string(kMaxHermiteOrder) + ")");
  constexpr double kEps = 1.0e-15;
  constexpr int kMaxIter = 200;

  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  // Newton on the normalized recurrence, initial guesses from the asymptotic
  // root spacing. Fills the non-negative roots in descending order.
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(double(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * rule.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * rule.nodes[1];
    else
      z = 2.0 * z - rule.nodes[i - 2];

    double pp = 0.0;
    int iter = 0;
    for (; iter < kMaxIter; ++iter) {
      double p1 = kPiQuarterInv;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z_old = z;
      z = z_old - p1 / pp;
      if (std::abs(z - z_old) <= kEps * std::max(1.0, std::abs(z)))
        break;
    }
    if (iter == kMaxIter)
      throw std::runtime_error("gauss_hermite: Newton iteration did not converge");
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  if (n % 2 == 1)
    rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre(int n)
{
  if (n < 1)
    throw std::out_of_range("gauss_legendre: order must be positive");
  constexpr double kEps = 1.0e-15;
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z_old = z;
      z = z_old - p1 / pp;
      if (std::abs(z - z_old) <= kEps)
        break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  if (n % 2 == 1)
    rule.nodes[n / 2] = 0.0;
  return rule;
}

double quad_overlap(int m, int n, double shift, int order)
{
  if (m < 0 || n < 0)
    throw std::invalid_argument("quad_overlap: negative mode index");
  if (order < m + n + 10)
    throw std::invalid_argument("quad_overlap: order " + std::to_string(order) + " below m+n+10");
  const QuadratureRule rule = gauss_hermite(order);
  // x = u + shift/2 turns the product of envelopes into e^{-u^2 - shift^2/4}.
  const double half = 0.5 * shift;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = rule.nodes[i];
    sum += rule.weights[i] * normalized_hermite(m, u + half) * normalized_hermite(n, u - half);
  }
  return sum * std::exp(-0.25 * shift * shift);
}

} // namespace bspade::specfun
