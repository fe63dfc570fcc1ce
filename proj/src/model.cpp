#include "bspade/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bspade/overlap.hpp"
#include "bspade/specfun.hpp"

namespace bspade {

namespace {

void validate_modes(const std::vector<Mode>& modes, const char* arm)
{
  if (modes.empty())
    throw std::invalid_argument(std::string("ModeSpace: empty ") + arm + " mode list");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].k < 0 || modes[i].l < 0)
      throw std::invalid_argument(std::string("ModeSpace: negative index in ") + arm + " modes");
    for (std::size_t j = 0; j < i; ++j)
      if (modes[i] == modes[j])
        throw std::invalid_argument(std::string("ModeSpace: duplicate ") + arm + " mode");
  }
}

} // namespace

ModeSpace::ModeSpace(std::vector<Mode> signal, std::vector<Mode> idler)
    : signal_(std::move(signal)), idler_(std::move(idler))
{
  validate_modes(signal_, "signal");
  validate_modes(idler_, "idler");
}

ModeSpace ModeSpace::square(int max_k, int max_l)
{
  if (max_k < 0 || max_l < 0)
    throw std::invalid_argument("ModeSpace::square: negative bound");
  std::vector<Mode> modes;
  for (int l = 0; l <= max_l; ++l)
    for (int k = 0; k <= max_k; ++k)
      modes.push_back({k, l});
  return ModeSpace(modes, modes);
}

Outcome ModeSpace::outcome(std::size_t index) const
{
  if (index >= size())
    throw std::out_of_range("ModeSpace::outcome: index out of range");
  return {signal_[index % signal_.size()], idler_[index / signal_.size()]};
}

std::optional<std::size_t> ModeSpace::index_of(Mode signal, Mode idler) const
{
  const auto s = std::find(signal_.begin(), signal_.end(), signal);
  const auto i = std::find(idler_.begin(), idler_.end(), idler);
  if (s == signal_.end() || i == idler_.end())
    return std::nullopt;
  return static_cast<std::size_t>(i - idler_.begin()) * signal_.size() + static_cast<std::size_t>(s - signal_.begin());
}

double ProbabilityMatrix::sum() const
{
  return std::accumulate(entries.begin(), entries.end(), 0.0);
}

CalibrationModel CalibrationModel::identity(std::size_t n)
{
  return {std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
}

double coincidence_prob(int k, int l, int k_idler, int l_idler, double d, const SchmidtModel& model)
{
  if (k < 0 || l < 0 || k_idler < 0 || l_idler < 0)
    throw std::invalid_argument("coincidence_prob: negative mode index");
  if (l != l_idler)
    return 0.0;
  const double plus = displaced_overlap(k, k_idler, d, Shift::Plus);
  const double minus = displaced_overlap(k, k_idler, d, Shift::Minus);
  return 0.5 * model.coeff_sq(k_idler, l) * (plus * plus + minus * minus);
}

double small_sep_prob(int k, int l, int k_idler, int l_idler, double d, const SchmidtModel& model)
{
  if (k < 0 || l < 0 || k_idler < 0 || l_idler < 0)
    throw std::invalid_argument("small_sep_prob: negative mode index");
  if (l != l_idler)
    return 0.0;
  const double d2 = d * d;
  double bracket = 0.0;
  if (k == k_idler)
    bracket = 1.0 - 0.5 * d2 * (2.0 * k_idler + 1.0);
  else if (k == k_idler - 1)
    bracket = 0.5 * d2 * k_idler;
  else if (k == k_idler + 1)
    bracket = 0.5 * d2 * (k_idler + 1.0);
  return model.coeff_sq(k_idler, l) * bracket;
}

ProbabilityMatrix prob_matrix(double d, const ModeSpace& space, const SchmidtModel& model, bool renormalize)
{
  ProbabilityMatrix p{space, std::vector<double>(space.size(), 0.0), d, renormalize};
  const auto& sig = space.signal();
  const auto& idl = space.idler();
  for (std::size_t i = 0; i < idl.size(); ++i)
    for (std::size_t s = 0; s < sig.size(); ++s)
      p.entries[i * sig.size() + s] = coincidence_prob(sig[s].k, sig[s].l, idl[i].k, idl[i].l, d, model);
  if (renormalize) {
    const double total = p.sum();
    if (total < 1.0e-9)
      throw std::domain_error("prob_matrix: in-space probability " + std::to_string(total) + " is degenerate");
    for (double& e : p.entries)
      e /= total;
  }
  return p;
}

std::vector<double> apply_calibration(std::span<const double> p, const CalibrationModel& cal)
{
  if (cal.alpha.size() != p.size() || cal.beta.size() != p.size())
    throw std::invalid_argument("apply_calibration: calibration has " + std::to_string(cal.alpha.size())
                                + " entries, matrix has " + std::to_string(p.size()));
  std::vector<double> out(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::max(0.0, cal.alpha[i] * p[i] + cal.beta[i]);
    total += out[i];
  }
  if (!(total > 0.0))
    throw std::domain_error("apply_calibration: every entry maps to zero");
  for (double& e : out)
    e /= total;
  return out;
}

ProbabilityMatrix apply_calibration(const ProbabilityMatrix& p, const CalibrationModel& cal)
{
  ProbabilityMatrix out{p.space, apply_calibration(std::span<const double>(p.entries), cal), p.d, true};
  return out;
}

double marginal_intensity(double x, double d, const SchmidtModel& model, PsfKind kind)
{
  if (kind == PsfKind::Gaussian) {
    const double a = specfun::hg1d(0, x - d);
    const double b = specfun::hg1d(0, x + d);
    return 0.5 * (a * a + b * b);
  }
  const auto& w = model.marginal_weights();
  const int max_m = static_cast<int>(w.size()) - 1;
  thread_local std::vector<double> minus_modes;
  thread_local std::vector<double> plus_modes;
  specfun::hg1d_all(max_m, x - d, minus_modes);
  specfun::hg1d_all(max_m, x + d, plus_modes);
  double sum = 0.0;
  for (int m = 0; m <= max_m; ++m)
    sum += w[m] * (minus_modes[m] * minus_modes[m] + plus_modes[m] * plus_modes[m]);
  return 0.5 * sum;
}

void PixelGrid::validate() const
{
  if (pixels < 1)
    throw std::invalid_argument("PixelGrid: pixel count must be positive");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("PixelGrid: span must be a finite, increasing interval");
}

std::vector<double> PixelGrid::edges() const
{
  validate();
  std::vector<double> e(static_cast<std::size_t>(pixels) + 1);
  const double width = (hi - lo) / pixels;
  for (int i = 0; i <= pixels; ++i)
    e[i] = lo + width * i;
  e.back() = hi;
  return e;
}

std::vector<double> pixel_probs(double d, const PixelGrid& grid, const SchmidtModel& model, PsfKind kind)
{
  static const specfun::QuadratureRule rule = specfun::gauss_legendre(kPixelQuadratureOrder);
  const std::vector<double> e = grid.edges();
  std::vector<double> out(static_cast<std::size_t>(grid.pixels) + 1, 0.0);
  double captured = 0.0;
  for (int i = 0; i < grid.pixels; ++i) {
    const double mid = 0.5 * (e[i] + e[i + 1]);
    const double half = 0.5 * (e[i + 1] - e[i]);
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j)
      acc += rule.weights[j] * marginal_intensity(mid + half * rule.nodes[j], d, model, kind);
    out[i] = acc * half;
    captured += out[i];
  }
  out.back() = std::max(0.0, 1.0 - captured);
  return out;
}

ForwardModel spade_forward(ModeSpace space, SchmidtModel model, bool renormalize,
                           std::optional<CalibrationModel> calibration)
{
  if (calibration && calibration->size() != space.size())
    throw std::invalid_argument("spade_forward: calibration size does not match mode space");
  return [space = std::move(space), model = std::move(model), renormalize,
          calibration = std::move(calibration)](double d) {
    ProbabilityMatrix p = prob_matrix(d, space, model, renormalize);
    if (calibration)
      return apply_calibration(std::span<const double>(p.entries), *calibration);
    return std::move(p.entries);
  };
}

ForwardModel direct_forward(PixelGrid grid, SchmidtModel model, PsfKind kind)
{
  grid.validate();
  return [grid, model = std::move(model), kind](double d) { return pixel_probs(d, grid, model, kind); };
}

} // namespace bspade
