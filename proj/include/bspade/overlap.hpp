#pragma once

namespace bspade {

/// Direction of the per-arm displacement: the two incoherent components sit
/// at +d and -d.
enum class Shift : int { Plus = +1, Minus = -1 };

inline double sign_of(Shift s) { return s == Shift::Plus ? 1.0 : -1.0; }

/// <m|n^{+-}> = integral of HG_m(x) HG_n(x +- d) dx, exact closed form
///   sqrt(m!/n!) 2^{(m-n)/2} (+-d)^{n-m} e^{-d^2/4} L_m^{n-m}(d^2/2),  n >= m.
/// The m > n case uses <m|n^{+-}> = <n|m^{-+}>.
double displaced_overlap(int m, int n, double d, Shift sign);

/// First-order expansion of displaced_overlap in d, using
/// HG_n' = sqrt(n/2) HG_{n-1} - sqrt((n+1)/2) HG_{n+1}:
///   <m|n^{+-}> ~ delta_mn +- d (sqrt(n/2) delta_{m,n-1} - sqrt((n+1)/2) delta_{m,n+1}).
double overlap_first_order(int m, int n, double d, Shift sign);

/// Per-arm shift d and total separation delta = 2d.
inline double total_separation(double d) { return 2.0 * d; }
inline double per_arm_shift(double delta) { return 0.5 * delta; }

} // namespace bspade
