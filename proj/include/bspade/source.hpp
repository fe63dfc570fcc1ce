#pragma once

#include <vector>

namespace bspade {

/// Physical parameters of the down-conversion source, all in meters.
struct SourceParams
{
  double pump_waist = 0.0;
  double crystal_length = 0.0;
  double pump_wavelength = 0.0;
  double schmidt_waist = 0.0;

  /// Throws std::invalid_argument unless every length is finite and positive.
  void validate() const;
};

/// gamma = (1/sigma_p) sqrt(L lambda_p / 2pi).
double gamma_from_physical(const SourceParams& params);

/// Schmidt coefficient C_mn = 4g/(1+g)^2 |(1-g)/(1+g)|^(m+n), evaluated in
/// log space.
double schmidt_coeff(int m, int n, double gamma);

/// Schmidt number K = (gamma + 1/gamma)^2 / 4.
double schmidt_number(double gamma);

/// Ratio q = ((1-gamma)/(1+gamma))^2; C_mn^2 = C_00^2 q^(m+n).
double schmidt_ratio(double gamma);

struct Truncation
{
  int max_m = 0;
  int max_l = 0;
};

inline constexpr int kDefaultTruncationCap = 2000;

/// Smallest symmetric truncation (M, M) with sum_{m,n<=M} C_mn^2 >= 1 - eps.
/// Throws std::domain_error when M would exceed hard_cap.
Truncation choose_truncation(double gamma, double eps, int hard_cap = kDefaultTruncationCap);

/// Adimensional per-arm shift d = sqrt(2) x / sigma_s for a physical shift x.
double adimensional_shift(double physical_shift, double schmidt_waist);
double physical_shift(double adimensional, double schmidt_waist);

/// Immutable source description shared by every forward model.
class SchmidtModel
{
 public:
  static constexpr double kDefaultMassDeficit = 1.0e-12;

  explicit SchmidtModel(double gamma, double mass_deficit = kDefaultMassDeficit);

  double gamma() const { return gamma_; }
  double q() const { return q_; }
  double schmidt_number() const;
  int max_m() const { return trunc_.max_m; }
  int max_l() const { return trunc_.max_l; }
  double mass_deficit() const { return eps_; }

  double coeff(int m, int n) const { return schmidt_coeff(m, n, gamma_); }
  double coeff_sq(int m, int n) const;

  /// Reduced single-photon weights w_m = sum_{n<=max_l} C_mn^2, m <= max_m.
  const std::vector<double>& marginal_weights() const { return marginal_; }

 private:
  double gamma_;
  double q_;
  double eps_;
  Truncation trunc_;
  std::vector<double> marginal_;
};

} // namespace bspade
