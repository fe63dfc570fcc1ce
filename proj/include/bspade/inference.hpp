#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bspade/model.hpp"
#include "bspade/overlap.hpp"

namespace bspade {

/// Photon counts over the outcomes of a forward model (mode pairs or pixels).
struct CountMatrix
{
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  /// Known per-arm shift d, when the acquisition is labeled.
  std::optional<double> separation;
  double duration = 0.0;
  double normalization = 1.0;

  /// Builds the matrix and its total; throws std::invalid_argument on a
  /// negative count.
  static CountMatrix from_counts(std::vector<std::int64_t> counts, std::optional<double> separation = std::nullopt);

  /// Checks non-negativity and that the counts sum to total.
  void validate() const;
  std::vector<double> frequencies() const;
};

/// Parameter the Fisher information refers to. Everything reported here is
/// with respect to the total separation delta = 2d.
enum class FisherParameter { TotalSeparation };

struct FisherReport
{
  std::vector<double> contributions;
  double total = 0.0;
  std::vector<std::size_t> skipped;
  FisherParameter parameter = FisherParameter::TotalSeparation;
};

inline constexpr double kProbabilityFloor = 1.0e-15;

/// Central-difference Fisher information of prob_fn at d with respect to
/// delta = 2d. Outcomes with probability below floor are skipped and listed.
/// Throws std::domain_error on a non-finite derivative.
FisherReport fisher_numeric(const ForwardModel& prob_fn, double d, double step = 1.0e-6,
                            double floor = kProbabilityFloor);

enum class FiBranch { Diag, Up, Down };

/// Small-separation FI of signal mode (k, l) paired with idler k (Diag),
/// k + 1 (Up), or k - 1 (Down).
double fi_closed_form(int k, int l, double gamma, FiBranch branch);

/// 1/2 + 1/2 ((1-g)/(1+g))^2: l = 0 row, both branches.
double fi_total_1d(double gamma);

struct FiBranches2d
{
  double up = 0.0;   // (1-g)^2 / (8g)
  double down = 0.0; // (1+g)^2 / (8g)
  double total() const { return up + down; }
};

FiBranches2d fi_branches_2d(double gamma);

/// (gamma + 1/gamma) / 4 = sqrt(K) / 2.
double fi_total_2d(double gamma);

/// Variance bound on delta per the 2D coincidence FI: 2 / (n sqrt(K)).
double crlb(double schmidt_number, double n_photons);

/// HG_1 projection probability of the gamma = 1 (Gaussian) source:
/// 1/2 d^2 e^{-d^2/2}.
double gaussian_hg1_prob(double d);

/// splitmix64 step, used to derive per-trial seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Multinomial draw of n photons, one categorical draw per photon from a
/// mt19937_64 stream. Throws std::invalid_argument unless probs is
/// non-negative and sums to 1 within 1e-9.
CountMatrix sample_counts(std::span<const double> probs, std::int64_t n, std::uint64_t seed);

/// Multinomial log-likelihood without the separation-independent constant.
double log_likelihood(std::span<const std::int64_t> counts, std::span<const double> probs);

struct SearchOptions
{
  double lo = 0.0;
  double hi = 2.0;
  int grid_points = 200;
  double tolerance = 1.0e-5;
};

/// Log-probabilities of a forward model tabulated on the coarse search grid.
/// Reusable across every estimate that shares the model and options.
class LikelihoodGrid
{
 public:
  LikelihoodGrid(const ForwardModel& model, const SearchOptions& options);

  const std::vector<double>& points() const { return points_; }
  const std::vector<std::vector<double>>& log_probs() const { return log_probs_; }
  std::size_t outcomes() const { return outcomes_; }

 private:
  std::vector<double> points_;
  std::vector<std::vector<double>> log_probs_;
  std::size_t outcomes_ = 0;
};

struct EstimationResult
{
  double d_hat = 0.0;
  double delta_hat = 0.0;
  double log_likelihood = 0.0;
  /// 1 / (N FI) on delta at max(d_hat, kCrlbMinSeparation).
  double crlb_variance = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int grid_points = 0;
  int iterations = 0;
  bool converged = false;
  bool bound_hit = false;
  bool flat = false;
};

inline constexpr double kCrlbMinSeparation = 1.0e-4;

/// Grid search then golden-section refinement of the log-likelihood.
/// Throws std::invalid_argument when counts and model disagree in size or the
/// search options are unusable.
EstimationResult mle_estimate(const CountMatrix& counts, const ForwardModel& model, const SearchOptions& options = {},
                              const LikelihoodGrid* grid = nullptr);

struct CalibrationFit
{
  CalibrationModel calibration;
  /// Entries whose theoretical probability does not vary across the
  /// datasets; they get alpha = 1 and beta = mean residual.
  std::vector<std::size_t> rank_deficient;
};

/// Independent least squares per entry of the normalized counts against the
/// theory probabilities at each dataset's known separation.
/// Throws std::invalid_argument for fewer than two distinct separations,
/// unlabeled datasets, or size mismatch.
CalibrationFit fit_calibration(std::span<const CountMatrix> datasets, const ForwardModel& theory);

enum class McMethod { Spade, DirectGaussian, DirectSpdc };

const char* to_string(McMethod method);
std::optional<McMethod> parse_method(const std::string& name);

struct McOptions
{
  int max_k = 6;
  int max_l = 0;
  PixelGrid pixels{};
  SearchOptions search{};
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct McSummary
{
  double mean = 0.0;      // mean of d_hat
  double std_error = 0.0; // sample standard deviation of d_hat
  double boundary_fraction = 0.0;
  double flat_fraction = 0.0;
  int trials = 0;
  std::vector<double> estimates;
};

/// Repeated sample + estimate cycles at a fixed true separation d. Trial t
/// draws with derive_seed(seed, t); results are stored by trial index.
McSummary mc_standard_error(McMethod method, double gamma, std::int64_t n_photons, double d, int trials,
                            std::uint64_t seed, const McOptions& options = {});

/// Forward model used by mc_standard_error for a method.
ForwardModel method_forward(McMethod method, const SchmidtModel& model, const McOptions& options);

} // namespace bspade
