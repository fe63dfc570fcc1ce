#include "bspade/overlap.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bspade/specfun.hpp"

namespace bspade {

double displaced_overlap(int m, int n, double d, Shift sign)
{
  if (m < 0 || n < 0)
    throw std::invalid_argument("displaced_overlap: negative mode index");
  if (m > n)
    return displaced_overlap(n, m, d, sign == Shift::Plus ? Shift::Minus : Shift::Plus);

  const int gap = n - m;
  const double x = 0.5 * d * d;
  const double lag = specfun::laguerre(m, gap, x);
  if (gap == 0)
    return std::exp(-0.25 * d * d) * lag;
  if (d == 0.0)
    return 0.0;

  const double signed_d = sign_of(sign) * d;
  const double log_mag = 0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)) - 0.5 * gap * std::numbers::ln2
                         + gap * std::log(std::abs(signed_d)) - 0.25 * d * d;
  const double parity = (signed_d < 0.0 && gap % 2 == 1) ? -1.0 : 1.0;
  return parity * std::exp(log_mag) * lag;
}

double overlap_first_order(int m, int n, double d, Shift sign)
{
  if (m < 0 || n < 0)
    throw std::invalid_argument("overlap_first_order: negative mode index");
  if (m == n)
    return 1.0;
  double derivative = 0.0;
  if (m == n - 1)
    derivative = std::sqrt(0.5 * n);
  else if (m == n + 1)
    derivative = -std::sqrt(0.5 * (n + 1));
  return sign_of(sign) * d * derivative;
}

} // namespace bspade
