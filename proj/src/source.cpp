#include "bspade/source.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bspade {

namespace {

void require_gamma(double gamma, const char* where)
{
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument(std::string(where) + ": gamma must be finite and positive");
}

} // namespace

void SourceParams::validate() const
{
  auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("source parameter ") + name + " must be finite and positive");
  };
  check(pump_waist, "pump_waist");
  check(crystal_length, "crystal_length");
  check(pump_wavelength, "pump_wavelength");
  check(schmidt_waist, "schmidt_waist");
}

double gamma_from_physical(const SourceParams& params)
{
  // The Schmidt waist does not enter gamma; it only fixes the length scale.
  auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("gamma_from_physical: ") + name + " must be finite and positive");
  };
  check(params.pump_waist, "pump_waist");
  check(params.crystal_length, "crystal_length");
  check(params.pump_wavelength, "pump_wavelength");
  return std::sqrt(params.crystal_length * params.pump_wavelength / (2.0 * std::numbers::pi)) / params.pump_waist;
}

double schmidt_ratio(double gamma)
{
  require_gamma(gamma, "schmidt_ratio");
  const double r = (1.0 - gamma) / (1.0 + gamma);
  return r * r;
}

double schmidt_coeff(int m, int n, double gamma)
{
  if (m < 0 || n < 0)
    throw std::invalid_argument("schmidt_coeff: negative mode index");
  require_gamma(gamma, "schmidt_coeff");
  const double log_c00 = std::log(4.0 * gamma) - 2.0 * std::log1p(gamma);
  const int order = m + n;
  if (order == 0)
    return std::exp(log_c00);
  const double r = std::abs((1.0 - gamma) / (1.0 + gamma));
  if (r == 0.0)
    return 0.0;
  return std::exp(log_c00 + order * std::log(r));
}

double schmidt_number(double gamma)
{
  require_gamma(gamma, "schmidt_number");
  const double s = gamma + 1.0 / gamma;
  return 0.25 * s * s;
}

Truncation choose_truncation(double gamma, double eps, int hard_cap)
{
  require_gamma(gamma, "choose_truncation");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("choose_truncation: mass deficit must lie in (0, 1)");
  // The coefficient table is separable, C_mn = C_m0 C_0n / C_00, so the
  // captured mass of the (M, M) block is (sum_{m<=M} C_m0^2)^2 / C_00^2.
  const double c00_sq = std::pow(schmidt_coeff(0, 0, gamma), 2);
  double row = 0.0;
  for (int m = 0; m <= hard_cap; ++m) {
    row += std::pow(schmidt_coeff(m, 0, gamma), 2);
    const double mass = row * row / c00_sq;
    if (mass >= 1.0 - eps)
      return {m, m};
  }
  throw std::domain_error("choose_truncation: gamma " + std::to_string(gamma) + " needs more than "
                          + std::to_string(hard_cap) + " modes per axis");
}

double adimensional_shift(double physical_shift, double schmidt_waist)
{
  if (!(schmidt_waist > 0.0))
    throw std::invalid_argument("adimensional_shift: schmidt waist must be positive");
  return std::numbers::sqrt2 * physical_shift / schmidt_waist;
}

double physical_shift(double adimensional, double schmidt_waist)
{
  if (!(schmidt_waist > 0.0))
    throw std::invalid_argument("physical_shift: schmidt waist must be positive");
  return adimensional * schmidt_waist / std::numbers::sqrt2;
}

SchmidtModel::SchmidtModel(double gamma, double mass_deficit)
    : gamma_(gamma), q_(schmidt_ratio(gamma)), eps_(mass_deficit), trunc_(choose_truncation(gamma, mass_deficit))
{
  marginal_.assign(static_cast<std::size_t>(trunc_.max_m) + 1, 0.0);
  for (int m = 0; m <= trunc_.max_m; ++m) {
    double w = 0.0;
    for (int n = 0; n <= trunc_.max_l; ++n)
      w += coeff_sq(m, n);
    marginal_[m] = w;
  }
}

double SchmidtModel::schmidt_number() const
{
  return bspade::schmidt_number(gamma_);
}

double SchmidtModel::coeff_sq(int m, int n) const
{
  const double c = coeff(m, n);
  return c * c;
}

} // namespace bspade
