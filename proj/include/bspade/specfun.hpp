#pragma once

#include <vector>

namespace bspade::specfun {

/// Gauss rule for the weight e^{-x^2} on the real line (or unit weight on a
/// finite interval for the Legendre variant). Nodes are sorted ascending.
struct QuadratureRule
{
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Largest Gauss-Hermite order we build. Newton iteration on the normalized
/// recurrence stays accurate well past this.
inline constexpr int kMaxHermiteOrder = 256;

/// Physicists' Hermite polynomial H_n(x), three-term recurrence.
double hermite(int n, double x);

/// Generalized Laguerre polynomial L_m^alpha(x) for integer alpha >= -m.
double laguerre(int m, int alpha, double x);

/// Normalized 1D Hermite-Gauss amplitude
///   (2^m m! sqrt(pi))^{-1/2} H_m(x) e^{-x^2/2}
/// in adimensional coordinates.
double hg1d(int m, double x);

/// hg1d(0..max_m, x) in one recurrence pass. out.size() == max_m + 1.
void hg1d_all(int max_m, double x, std::vector<double>& out);

/// Log of the Hermite-Gauss normalization (2^m m! sqrt(pi))^{-1/2}.
double hg_log_norm(int m);

/// n-point Gauss-Hermite rule; throws std::out_of_range past kMaxHermiteOrder.
QuadratureRule gauss_hermite(int n);

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Default Gauss-Hermite order for overlap integrals of modes m and n.
inline int default_overlap_order(int m, int n) { return 2 * (m + n) + 20; }

/// Integral of hg1d(m, x) * hg1d(n, x - shift) over the real line by
/// Gauss-Hermite quadrature in coordinates centered between the two modes,
/// where the integrand is e^{-u^2} times a polynomial of degree m + n.
/// Throws std::invalid_argument if order < m + n + 10 and std::out_of_range
/// if the order is beyond kMaxHermiteOrder.
double quad_overlap(int m, int n, double shift, int order);
inline double quad_overlap(int m, int n, double shift)
{
  return quad_overlap(m, n, shift, default_overlap_order(m, n));
}

} // namespace bspade::specfun
