#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bspade/source.hpp"

namespace bspade {

/// A 2D Hermite-Gauss projection HG_{k,l}: k along the displacement axis.
struct Mode
{
  int k = 0;
  int l = 0;
  friend bool operator==(const Mode&, const Mode&) = default;
};

/// One joint projection: signal arm (displaced) and idler arm.
struct Outcome
{
  Mode signal;
  Mode idler;
};

/// Set of joint projections: every signal mode paired with every idler mode.
/// Outcomes are indexed idler-major: index = idler_index * n_signal + signal_index.
class ModeSpace
{
 public:
  ModeSpace(std::vector<Mode> signal, std::vector<Mode> idler);

  /// k in 0..max_k, l in 0..max_l on both arms. square(6) is the 7x7 space.
  static ModeSpace square(int max_k, int max_l = 0);

  const std::vector<Mode>& signal() const { return signal_; }
  const std::vector<Mode>& idler() const { return idler_; }
  std::size_t size() const { return signal_.size() * idler_.size(); }
  Outcome outcome(std::size_t index) const;
  std::optional<std::size_t> index_of(Mode signal, Mode idler) const;

 private:
  std::vector<Mode> signal_;
  std::vector<Mode> idler_;
};

/// Outcome probabilities over a ModeSpace at per-arm shift d.
struct ProbabilityMatrix
{
  ModeSpace space;
  std::vector<double> entries;
  double d = 0.0;
  bool renormalized = false;

  double at(std::size_t idler_index, std::size_t signal_index) const
  {
    return entries[idler_index * space.signal().size() + signal_index];
  }
  double sum() const;
};

/// Per-entry affine detector response P = alpha * P_theory + beta.
struct CalibrationModel
{
  std::vector<double> alpha;
  std::vector<double> beta;

  static CalibrationModel identity(std::size_t n);
  std::size_t size() const { return alpha.size(); }
};

/// Coincidence probability for signal projection (k, l) and idler projection
/// (k_idler, l_idler) with the signal displaced by +-d:
///   1/2 C_{k_idler,l}^2 delta_{l,l_idler} (<k|k_idler^+>^2 + <k|k_idler^->^2).
double coincidence_prob(int k, int l, int k_idler, int l_idler, double d, const SchmidtModel& model);

/// Second-order expansion of coincidence_prob in d.
double small_sep_prob(int k, int l, int k_idler, int l_idler, double d, const SchmidtModel& model);

/// Assemble coincidence_prob over a space. With renormalize, divides by the
/// in-space total; throws std::domain_error if that total is below 1e-9.
ProbabilityMatrix prob_matrix(double d, const ModeSpace& space, const SchmidtModel& model, bool renormalize = true);

/// Entrywise alpha * P + beta, floored at zero, then renormalized.
/// Throws std::invalid_argument on size mismatch and std::domain_error if
/// everything maps to zero.
ProbabilityMatrix apply_calibration(const ProbabilityMatrix& p, const CalibrationModel& cal);
std::vector<double> apply_calibration(std::span<const double> p, const CalibrationModel& cal);

enum class PsfKind { Gaussian, Spdc };

/// Signal-arm intensity density for the incoherent +-d pair.
/// Gaussian: 1/2 (HG_0(x-d)^2 + HG_0(x+d)^2).
/// Spdc: the reduced single-photon state, 1/2 sum_m w_m (HG_m(x-d)^2 + HG_m(x+d)^2).
double marginal_intensity(double x, double d, const SchmidtModel& model, PsfKind kind);

/// Uniform pixel array over [lo, hi] in adimensional coordinates.
struct PixelGrid
{
  int pixels = 50;
  double lo = -4.0;
  double hi = 4.0;

  /// Throws std::invalid_argument for an empty or inverted grid.
  void validate() const;
  std::vector<double> edges() const;
};

/// Gauss-Legendre points per pixel used by pixel_probs.
inline constexpr int kPixelQuadratureOrder = 12;

/// Probability per pixel plus a trailing out-of-span bucket; sums to 1.
std::vector<double> pixel_probs(double d, const PixelGrid& grid, const SchmidtModel& model, PsfKind kind);

/// Separation -> outcome probability vector.
using ForwardModel = std::function<std::vector<double>(double d)>;

ForwardModel spade_forward(ModeSpace space, SchmidtModel model, bool renormalize = true,
                           std::optional<CalibrationModel> calibration = std::nullopt);
ForwardModel direct_forward(PixelGrid grid, SchmidtModel model, PsfKind kind);

} // namespace bspade
