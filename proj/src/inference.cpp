#include "bspade/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace bspade {

// ---------------------------------------------------------------------------
// Counts

CountMatrix CountMatrix::from_counts(std::vector<std::int64_t> counts, std::optional<double> separation)
{
  CountMatrix m;
  m.counts = std::move(counts);
  for (auto c : m.counts) {
    if (c < 0)
      throw std::invalid_argument("CountMatrix: negative count");
    m.total += c;
  }
  m.separation = separation;
  return m;
}

void CountMatrix::validate() const
{
  std::int64_t sum = 0;
  for (auto c : counts) {
    if (c < 0)
      throw std::invalid_argument("CountMatrix: negative count");
    sum += c;
  }
  if (sum != total)
    throw std::invalid_argument("CountMatrix: counts sum to " + std::to_string(sum) + ", total says "
                                + std::to_string(total));
}

std::vector<double> CountMatrix::frequencies() const
{
  std::vector<double> f(counts.size(), 0.0);
  if (total <= 0)
    return f;
  for (std::size_t i = 0; i < counts.size(); ++i)
    f[i] = double(counts[i]) / double(total);
  return f;
}

// ---------------------------------------------------------------------------
// Fisher information

FisherReport fisher_numeric(const ForwardModel& prob_fn, double d, double step, double floor)
{
  if (!(step > 0.0))
    throw std::invalid_argument("fisher_numeric: step must be positive");
  const std::vector<double> centre = prob_fn(d);
  const std::vector<double> up = prob_fn(d + step);
  const std::vector<double> down = prob_fn(d - step);
  if (up.size() != centre.size() || down.size() != centre.size())
    throw std::invalid_argument("fisher_numeric: forward model changed its outcome count");

  FisherReport report;
  report.contributions.assign(centre.size(), 0.0);
  for (std::size_t j = 0; j < centre.size(); ++j) {
    if (centre[j] < floor) {
      report.skipped.push_back(j);
      continue;
    }
    // dP/d(delta) = dP/dd / 2.
    const double deriv = (up[j] - down[j]) / (4.0 * step);
    if (!std::isfinite(deriv))
      throw std::domain_error("fisher_numeric: non-finite derivative at outcome " + std::to_string(j));
    report.contributions[j] = deriv * deriv / centre[j];
  }
  report.total = std::accumulate(report.contributions.begin(), report.contributions.end(), 0.0);
  return report;
}

double fi_closed_form(int k, int l, double gamma, FiBranch branch)
{
  if (k < 0 || l < 0)
    throw std::invalid_argument("fi_closed_form: negative mode index");
  switch (branch) {
  case FiBranch::Diag:
    return 0.0;
  case FiBranch::Up: {
    const double c = schmidt_coeff(k + 1, l, gamma);
    return 0.5 * (k + 1) * c * c;
  }
  case FiBranch::Down: {
    if (k == 0)
      return 0.0;
    const double c = schmidt_coeff(k - 1, l, gamma);
    return 0.5 * k * c * c;
  }
  }
  return 0.0;
}

double fi_total_1d(double gamma)
{
  return 0.5 + 0.5 * schmidt_ratio(gamma);
}

FiBranches2d fi_branches_2d(double gamma)
{
  if (!(gamma > 0.0))
    throw std::invalid_argument("fi_branches_2d: gamma must be positive");
  return {(1.0 - gamma) * (1.0 - gamma) / (8.0 * gamma), (1.0 + gamma) * (1.0 + gamma) / (8.0 * gamma)};
}

double fi_total_2d(double gamma)
{
  if (!(gamma > 0.0))
    throw std::invalid_argument("fi_total_2d: gamma must be positive");
  return 0.25 * (gamma + 1.0 / gamma);
}

double crlb(double schmidt_number, double n_photons)
{
  if (!(schmidt_number >= 1.0))
    throw std::invalid_argument("crlb: Schmidt number must be >= 1");
  if (!(n_photons >= 1.0))
    throw std::invalid_argument("crlb: photon number must be >= 1");
  return 2.0 / (n_photons * std::sqrt(schmidt_number));
}

double gaussian_hg1_prob(double d)
{
  return 0.5 * d * d * std::exp(-0.5 * d * d);
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CountMatrix sample_counts(std::span<const double> probs, std::int64_t n, std::uint64_t seed)
{
  if (probs.empty())
    throw std::invalid_argument("sample_counts: empty probability vector");
  if (n < 0)
    throw std::invalid_argument("sample_counts: negative photon number");
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i]))
      throw std::invalid_argument("sample_counts: probabilities must be finite and non-negative");
    acc += probs[i];
    cdf[i] = acc;
  }
  if (std::abs(acc - 1.0) > 1.0e-9)
    throw std::invalid_argument("sample_counts: probabilities sum to " + std::to_string(acc) + ", not 1");

  std::vector<std::int64_t> counts(probs.size(), 0);
  // Last outcome with non-zero mass absorbs u values past the rounded cdf.
  std::size_t last = probs.size() - 1;
  while (last > 0 && probs[last] == 0.0)
    --last;
  std::mt19937_64 gen(seed);
  for (std::int64_t i = 0; i < n; ++i) {
    // 53-bit uniform in [0, 1), independent of the standard library's
    // distribution implementations.
    const double u = double(gen() >> 11) * 0x1.0p-53 * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx > last)
      idx = last;
    ++counts[idx];
  }
  return CountMatrix::from_counts(std::move(counts));
}

// ---------------------------------------------------------------------------
// Likelihood and MLE

double log_likelihood(std::span<const std::int64_t> counts, std::span<const double> probs)
{
  if (counts.size() != probs.size())
    throw std::invalid_argument("log_likelihood: counts and probabilities differ in size");
  double ll = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0)
      ll += double(counts[i]) * std::log(std::max(probs[i], kProbabilityFloor));
  return ll;
}

namespace {

void validate_search(const SearchOptions& o)
{
  if (!(o.hi > o.lo) || !std::isfinite(o.lo) || !std::isfinite(o.hi))
    throw std::invalid_argument("mle_estimate: search bounds must be finite with hi > lo");
  if (o.grid_points < 2)
    throw std::invalid_argument("mle_estimate: need at least 2 grid points");
  if (!(o.tolerance > 0.0))
    throw std::invalid_argument("mle_estimate: tolerance must be positive");
}

double grid_point(const SearchOptions& o, int i)
{
  if (i == o.grid_points - 1)
    return o.hi;
  return o.lo + (o.hi - o.lo) * double(i) / double(o.grid_points - 1);
}

double cached_log_likelihood(std::span<const std::int64_t> counts, const std::vector<double>& log_p)
{
  double ll = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0)
      ll += double(counts[i]) * log_p[i];
  return ll;
}

} // namespace

LikelihoodGrid::LikelihoodGrid(const ForwardModel& model, const SearchOptions& options)
{
  validate_search(options);
  points_.resize(options.grid_points);
  log_probs_.resize(options.grid_points);
  for (int i = 0; i < options.grid_points; ++i) {
    points_[i] = grid_point(options, i);
    std::vector<double> p = model(points_[i]);
    for (double& v : p)
      v = std::log(std::max(v, kProbabilityFloor));
    if (i == 0)
      outcomes_ = p.size();
    else if (p.size() != outcomes_)
      throw std::invalid_argument("LikelihoodGrid: forward model changed its outcome count");
    log_probs_[i] = std::move(p);
  }
}

EstimationResult mle_estimate(const CountMatrix& counts, const ForwardModel& model, const SearchOptions& options,
                              const LikelihoodGrid* grid)
{
  validate_search(options);
  counts.validate();
  if (grid && (grid->points().size() != std::size_t(options.grid_points) || grid->points().front() != options.lo
               || grid->points().back() != options.hi))
    throw std::invalid_argument("mle_estimate: precomputed grid does not match search options");

  auto ll_at = [&](double d) {
    const std::vector<double> p = model(d);
    return log_likelihood(counts.counts, p);
  };

  std::vector<double> grid_ll(options.grid_points);
  if (grid) {
    if (grid->outcomes() != counts.counts.size())
      throw std::invalid_argument("mle_estimate: counts have " + std::to_string(counts.counts.size())
                                  + " outcomes, model has " + std::to_string(grid->outcomes()));
    for (int i = 0; i < options.grid_points; ++i)
      grid_ll[i] = cached_log_likelihood(counts.counts, grid->log_probs()[i]);
  } else {
    const std::vector<double> probe = model(options.lo);
    if (probe.size() != counts.counts.size())
      throw std::invalid_argument("mle_estimate: counts have " + std::to_string(counts.counts.size())
                                  + " outcomes, model has " + std::to_string(probe.size()));
    for (int i = 0; i < options.grid_points; ++i)
      grid_ll[i] = ll_at(grid_point(options, i));
  }

  const auto best_it = std::max_element(grid_ll.begin(), grid_ll.end());
  const int best = static_cast<int>(best_it - grid_ll.begin());
  const auto [min_it, max_it] = std::minmax_element(grid_ll.begin(), grid_ll.end());

  EstimationResult r;
  r.lo = options.lo;
  r.hi = options.hi;
  r.grid_points = options.grid_points;
  r.flat = (*max_it - *min_it) <= 1.0e-9 * std::max(1.0, std::abs(*max_it));

  // Golden-section maximization inside the bracket around the grid optimum.
  double a = grid_point(options, std::max(best - 1, 0));
  double b = grid_point(options, std::min(best + 1, options.grid_points - 1));
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double e = a + kInvPhi * (b - a);
  double fc = ll_at(c);
  double fe = ll_at(e);
  int iter = 0;
  while (b - a > options.tolerance && iter < 200) {
    if (fc >= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kInvPhi * (b - a);
      fc = ll_at(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kInvPhi * (b - a);
      fe = ll_at(e);
    }
    ++iter;
  }
  r.iterations = iter;
  r.converged = (b - a) <= options.tolerance;

  double d_best = 0.5 * (a + b);
  double ll_best = ll_at(d_best);
  // A monotone likelihood peaks on the search boundary itself.
  for (double edge : {options.lo, options.hi}) {
    if (std::abs(d_best - edge) <= 2.0 * options.tolerance) {
      const double ll_edge = ll_at(edge);
      if (ll_edge >= ll_best) {
        d_best = edge;
        ll_best = ll_edge;
      }
    }
  }
  if (*best_it > ll_best) {
    d_best = grid_point(options, best);
    ll_best = *best_it;
  }

  r.d_hat = d_best;
  r.delta_hat = total_separation(d_best);
  r.log_likelihood = ll_best;
  r.bound_hit = (d_best - options.lo) <= options.tolerance || (options.hi - d_best) <= options.tolerance;

  const double d_eval = std::max(d_best, kCrlbMinSeparation);
  const double step = std::min(1.0e-6, 0.1 * d_eval);
  const FisherReport fi = fisher_numeric(model, d_eval, step);
  r.crlb_variance = (fi.total > 0.0 && counts.total > 0) ? 1.0 / (double(counts.total) * fi.total)
                                                         : std::numeric_limits<double>::infinity();
  return r;
}

// ---------------------------------------------------------------------------
// Calibration

CalibrationFit fit_calibration(std::span<const CountMatrix> datasets, const ForwardModel& theory)
{
  if (datasets.size() < 2)
    throw std::invalid_argument("fit_calibration: need at least two datasets");
  std::vector<double> seps;
  for (const auto& ds : datasets) {
    if (!ds.separation)
      throw std::invalid_argument("fit_calibration: every dataset needs a known separation");
    if (ds.total <= 0)
      throw std::invalid_argument("fit_calibration: dataset with no counts");
    ds.validate();
    seps.push_back(*ds.separation);
  }
  std::sort(seps.begin(), seps.end());
  if (std::unique(seps.begin(), seps.end()) - seps.begin() < 2)
    throw std::invalid_argument("fit_calibration: need at least two distinct separations");

  const std::size_t n_sets = datasets.size();
  std::vector<std::vector<double>> x(n_sets), y(n_sets);
  std::size_t n_out = 0;
  for (std::size_t s = 0; s < n_sets; ++s) {
    x[s] = theory(*datasets[s].separation);
    y[s] = datasets[s].frequencies();
    if (s == 0)
      n_out = x[s].size();
    if (x[s].size() != n_out || y[s].size() != n_out)
      throw std::invalid_argument("fit_calibration: dataset size does not match the model");
  }

  CalibrationFit fit;
  fit.calibration.alpha.assign(n_out, 1.0);
  fit.calibration.beta.assign(n_out, 0.0);
  for (std::size_t j = 0; j < n_out; ++j) {
    double mx = 0.0, my = 0.0;
    for (std::size_t s = 0; s < n_sets; ++s) {
      mx += x[s][j];
      my += y[s][j];
    }
    mx /= double(n_sets);
    my /= double(n_sets);
    double sxx = 0.0, sxy = 0.0, scale = 0.0;
    for (std::size_t s = 0; s < n_sets; ++s) {
      sxx += (x[s][j] - mx) * (x[s][j] - mx);
      sxy += (x[s][j] - mx) * (y[s][j] - my);
      scale = std::max(scale, std::abs(x[s][j]));
    }
    double alpha = 1.0;
    double beta = 0.0;
    if (sxx <= 1.0e-24 * scale * scale * double(n_sets)) {
      fit.rank_deficient.push_back(j);
      beta = my - mx;
    } else {
      alpha = sxy / sxx;
      beta = my - alpha * mx;
    }
    fit.calibration.alpha[j] = std::max(alpha, 0.0);
    fit.calibration.beta[j] = std::clamp(beta, 0.0, 1.0);
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Monte Carlo

const char* to_string(McMethod method)
{
  switch (method) {
  case McMethod::Spade:
    return "spade";
  case McMethod::DirectGaussian:
    return "direct_gaussian";
  case McMethod::DirectSpdc:
    return "direct_spdc";
  }
  return "unknown";
}

std::optional<McMethod> parse_method(const std::string& name)
{
  for (McMethod m : {McMethod::Spade, McMethod::DirectGaussian, McMethod::DirectSpdc})
    if (name == to_string(m))
      return m;
  return std::nullopt;
}

ForwardModel method_forward(McMethod method, const SchmidtModel& model, const McOptions& options)
{
  switch (method) {
  case McMethod::Spade:
    return spade_forward(ModeSpace::square(options.max_k, options.max_l), model, true);
  case McMethod::DirectGaussian:
    return direct_forward(options.pixels, model, PsfKind::Gaussian);
  case McMethod::DirectSpdc:
    return direct_forward(options.pixels, model, PsfKind::Spdc);
  }
  throw std::invalid_argument("method_forward: unknown method");
}

McSummary mc_standard_error(McMethod method, double gamma, std::int64_t n_photons, double d, int trials,
                            std::uint64_t seed, const McOptions& options)
{
  if (trials < 2)
    throw std::invalid_argument("mc_standard_error: need at least 2 trials");
  if (n_photons < 1)
    throw std::invalid_argument("mc_standard_error: need at least one photon");

  const SchmidtModel model(gamma);
  const ForwardModel forward = method_forward(method, model, options);
  const LikelihoodGrid grid(forward, options.search);
  const std::vector<double> truth = forward(d);

  std::vector<EstimationResult> results(static_cast<std::size_t>(trials));
  auto run_trial = [&](int t) {
    const CountMatrix counts = sample_counts(truth, n_photons, derive_seed(seed, std::uint64_t(t)));
    results[t] = mle_estimate(counts, forward, options.search, &grid);
  };

  unsigned workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(trials));
  if (workers <= 1) {
    for (int t = 0; t < trials; ++t)
      run_trial(t);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int t = static_cast<int>(w); t < trials; t += static_cast<int>(workers))
            run_trial(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool)
      th.join();
    for (auto& e : errors)
      if (e)
        std::rethrow_exception(e);
  }

  McSummary s;
  s.trials = trials;
  s.estimates.reserve(results.size());
  int boundary = 0, flat = 0;
  for (const auto& r : results) {
    s.estimates.push_back(r.d_hat);
    boundary += r.bound_hit ? 1 : 0;
    flat += r.flat ? 1 : 0;
  }
  s.mean = std::accumulate(s.estimates.begin(), s.estimates.end(), 0.0) / trials;
  double ss = 0.0;
  for (double e : s.estimates)
    ss += (e - s.mean) * (e - s.mean);
  s.std_error = std::sqrt(ss / (trials - 1));
  s.boundary_fraction = double(boundary) / trials;
  s.flat_fraction = double(flat) / trials;
  return s;
}

} // namespace bspade
