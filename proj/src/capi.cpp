#include "bspade/bspade.h"

#include <algorithm>
#include <exception>
#include <optional>
#include <span>
#include <new>
#include <stdexcept>
#include <string>

#include "bspade/inference.hpp"
#include "bspade/model.hpp"
#include "bspade/source.hpp"

struct bspade_model
{
  bspade::SchmidtModel source;
  bspade::ModeSpace space;
  bool renormalize;
};

struct bspade_calibration
{
  bspade::CalibrationModel model;
};

namespace {

thread_local std::string g_last_error;

bspade_status fail(bspade_status code, const char* what)
{
  g_last_error = what;
  return code;
}

// Runs fn, mapping exceptions onto status codes.
template <class Fn>
bspade_status guarded(Fn&& fn)
{
  try {
    fn();
    g_last_error.clear();
    return BSPADE_OK;
  } catch (const std::invalid_argument& e) {
    return fail(BSPADE_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(BSPADE_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(BSPADE_ERR_NUMERICAL, e.what());
  } catch (const std::runtime_error& e) {
    return fail(BSPADE_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BSPADE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BSPADE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BSPADE_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name)
{
  if (!p)
    throw std::invalid_argument(std::string(name) + " is NULL");
}

bspade::SearchOptions to_options(const bspade_search* s)
{
  bspade::SearchOptions o;
  if (s) {
    o.lo = s->lo;
    o.hi = s->hi;
    o.grid_points = s->grid_points;
    o.tolerance = s->tolerance;
  }
  return o;
}

bspade::McMethod to_method(bspade_method m)
{
  switch (m) {
  case BSPADE_METHOD_SPADE:
    return bspade::McMethod::Spade;
  case BSPADE_METHOD_DIRECT_GAUSSIAN:
    return bspade::McMethod::DirectGaussian;
  case BSPADE_METHOD_DIRECT_SPDC:
    return bspade::McMethod::DirectSpdc;
  }
  throw std::invalid_argument("unknown method");
}

bspade::ForwardModel forward_of(const bspade_model* model, const bspade_calibration* cal)
{
  std::optional<bspade::CalibrationModel> c;
  if (cal)
    c = cal->model;
  return bspade::spade_forward(model->space, model->source, model->renormalize, std::move(c));
}

} // namespace

extern "C" {

const char* bspade_version(void)
{
  return BSPADE_VERSION_STRING;
}

const char* bspade_last_error(void)
{
  return g_last_error.c_str();
}

const char* bspade_method_name(bspade_method method)
{
  switch (method) {
  case BSPADE_METHOD_SPADE:
  case BSPADE_METHOD_DIRECT_GAUSSIAN:
  case BSPADE_METHOD_DIRECT_SPDC:
    return bspade::to_string(to_method(method));
  }
  return "unknown";
}

bspade_status bspade_gamma_from_physical(double pump_waist_m, double crystal_length_m, double pump_wavelength_m,
                                         double* gamma)
{
  return guarded([&] {
    require(gamma, "gamma");
    bspade::SourceParams p;
    p.pump_waist = pump_waist_m;
    p.crystal_length = crystal_length_m;
    p.pump_wavelength = pump_wavelength_m;
    *gamma = bspade::gamma_from_physical(p);
  });
}

bspade_status bspade_schmidt_number(double gamma, double* k)
{
  return guarded([&] {
    require(k, "k");
    *k = bspade::schmidt_number(gamma);
  });
}

bspade_status bspade_schmidt_coeff(int m, int n, double gamma, double* c)
{
  return guarded([&] {
    require(c, "c");
    *c = bspade::schmidt_coeff(m, n, gamma);
  });
}

bspade_status bspade_adimensional_shift(double physical_shift_m, double schmidt_waist_m, double* d)
{
  return guarded([&] {
    require(d, "d");
    *d = bspade::adimensional_shift(physical_shift_m, schmidt_waist_m);
  });
}

bspade_status bspade_fi_total_1d(double gamma, double* fi)
{
  return guarded([&] {
    require(fi, "fi");
    *fi = bspade::fi_total_1d(gamma);
  });
}

bspade_status bspade_fi_total_2d(double gamma, double* total, double* up, double* down)
{
  return guarded([&] {
    require(total, "total");
    const auto b = bspade::fi_branches_2d(gamma);
    *total = bspade::fi_total_2d(gamma);
    if (up)
      *up = b.up;
    if (down)
      *down = b.down;
  });
}

bspade_status bspade_crlb(double schmidt_number, double n_photons, double* variance)
{
  return guarded([&] {
    require(variance, "variance");
    *variance = bspade::crlb(schmidt_number, n_photons);
  });
}

bspade_status bspade_model_create(double gamma, int max_k, int max_l, int renormalize, bspade_model** model)
{
  return guarded([&] {
    require(model, "model");
    *model = nullptr;
    *model = new bspade_model{bspade::SchmidtModel(gamma), bspade::ModeSpace::square(max_k, max_l), renormalize != 0};
  });
}

void bspade_model_destroy(bspade_model* model)
{
  delete model;
}

size_t bspade_model_outcomes(const bspade_model* model)
{
  return model ? model->space.size() : 0;
}

bspade_status bspade_model_outcome(const bspade_model* model, size_t index, bspade_outcome* outcome)
{
  return guarded([&] {
    require(model, "model");
    require(outcome, "outcome");
    const auto o = model->space.outcome(index);
    *outcome = {o.signal.k, o.signal.l, o.idler.k, o.idler.l};
  });
}

bspade_status bspade_model_index_of(const bspade_model* model, const bspade_outcome* outcome, size_t* index)
{
  return guarded([&] {
    require(model, "model");
    require(outcome, "outcome");
    require(index, "index");
    const auto i = model->space.index_of({outcome->k_signal, outcome->l_signal}, {outcome->k_idler, outcome->l_idler});
    if (!i)
      throw std::invalid_argument("outcome is not part of the mode space");
    *index = *i;
  });
}

bspade_status bspade_model_probabilities(const bspade_model* model, double d, double* out, size_t len)
{
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    if (len != model->space.size())
      throw std::invalid_argument("output length does not match the mode space");
    const auto p = bspade::prob_matrix(d, model->space, model->source, model->renormalize);
    std::copy(p.entries.begin(), p.entries.end(), out);
  });
}

bspade_status bspade_model_calibrated_probabilities(const bspade_model* model, const bspade_calibration* calibration,
                                                    double d, double* out, size_t len)
{
  return guarded([&] {
    require(model, "model");
    require(calibration, "calibration");
    require(out, "out");
    if (len != model->space.size())
      throw std::invalid_argument("output length does not match the mode space");
    const auto p = bspade::prob_matrix(d, model->space, model->source, model->renormalize);
    const auto c = bspade::apply_calibration(p, calibration->model);
    std::copy(c.entries.begin(), c.entries.end(), out);
  });
}

bspade_status bspade_model_fisher(const bspade_model* model, double d, double* fi)
{
  return guarded([&] {
    require(model, "model");
    require(fi, "fi");
    *fi = bspade::fisher_numeric(forward_of(model, nullptr), d).total;
  });
}

bspade_status bspade_calibration_fit(const bspade_model* model, const double* separations, const int64_t* counts,
                                     size_t n_datasets, bspade_calibration** calibration, size_t* n_rank_deficient)
{
  return guarded([&] {
    require(model, "model");
    require(separations, "separations");
    require(counts, "counts");
    require(calibration, "calibration");
    *calibration = nullptr;
    const std::size_t n = model->space.size();
    std::vector<bspade::CountMatrix> sets;
    sets.reserve(n_datasets);
    for (std::size_t s = 0; s < n_datasets; ++s)
      sets.push_back(bspade::CountMatrix::from_counts(std::vector<std::int64_t>(counts + s * n, counts + (s + 1) * n),
                                                      separations[s]));
    auto fit = bspade::fit_calibration(sets, forward_of(model, nullptr));
    if (n_rank_deficient)
      *n_rank_deficient = fit.rank_deficient.size();
    *calibration = new bspade_calibration{std::move(fit.calibration)};
  });
}

bspade_status bspade_calibration_create(const double* alpha, const double* beta, size_t n,
                                        bspade_calibration** calibration)
{
  return guarded([&] {
    require(alpha, "alpha");
    require(beta, "beta");
    require(calibration, "calibration");
    *calibration = new bspade_calibration{{std::vector<double>(alpha, alpha + n), std::vector<double>(beta, beta + n)}};
  });
}

void bspade_calibration_destroy(bspade_calibration* calibration)
{
  delete calibration;
}

size_t bspade_calibration_size(const bspade_calibration* calibration)
{
  return calibration ? calibration->model.size() : 0;
}

bspade_status bspade_calibration_get(const bspade_calibration* calibration, size_t index, double* alpha, double* beta)
{
  return guarded([&] {
    require(calibration, "calibration");
    if (index >= calibration->model.size())
      throw std::out_of_range("calibration index out of range");
    if (alpha)
      *alpha = calibration->model.alpha[index];
    if (beta)
      *beta = calibration->model.beta[index];
  });
}

void bspade_search_default(bspade_search* search)
{
  if (!search)
    return;
  const bspade::SearchOptions o;
  *search = {o.lo, o.hi, o.grid_points, o.tolerance};
}

bspade_status bspade_estimate_separation(const bspade_model* model, const bspade_calibration* calibration,
                                         const int64_t* counts, size_t len, const bspade_search* search,
                                         bspade_estimate* result)
{
  return guarded([&] {
    require(model, "model");
    require(counts, "counts");
    require(result, "result");
    if (len != model->space.size())
      throw std::invalid_argument("counts length " + std::to_string(len) + " does not match the mode space ("
                                  + std::to_string(model->space.size()) + ")");
    const auto cm = bspade::CountMatrix::from_counts(std::vector<std::int64_t>(counts, counts + len));
    const auto r = bspade::mle_estimate(cm, forward_of(model, calibration), to_options(search));
    *result = {r.d_hat, r.delta_hat, r.log_likelihood, r.crlb_variance,
               r.iterations, r.converged ? 1 : 0, r.bound_hit ? 1 : 0, r.flat ? 1 : 0};
  });
}

bspade_status bspade_sample_counts(const double* probs, size_t len, int64_t n, uint64_t seed, int64_t* out)
{
  return guarded([&] {
    require(probs, "probs");
    require(out, "out");
    const auto c = bspade::sample_counts(std::span<const double>(probs, len), n, seed);
    std::copy(c.counts.begin(), c.counts.end(), out);
  });
}

uint64_t bspade_derive_seed(uint64_t master, uint64_t index)
{
  return bspade::derive_seed(master, index);
}

void bspade_mc_config_default(bspade_mc_config* config)
{
  if (!config)
    return;
  const bspade::McOptions o;
  bspade_search s;
  bspade_search_default(&s);
  *config = {0.15, 37000, 200, 1, o.max_k, o.max_l, o.pixels.pixels, o.pixels.lo, o.pixels.hi, s, 0};
}

bspade_status bspade_mc_standard_error(bspade_method method, const bspade_mc_config* config, double d,
                                       bspade_mc_result* result)
{
  return guarded([&] {
    require(config, "config");
    require(result, "result");
    bspade::McOptions o;
    o.max_k = config->max_k;
    o.max_l = config->max_l;
    o.pixels = {config->pixels, config->pixel_lo, config->pixel_hi};
    o.search = to_options(&config->search);
    o.threads = config->threads;
    const auto s = bspade::mc_standard_error(to_method(method), config->gamma, config->photons, d, config->trials,
                                             config->seed, o);
    *result = {s.mean, s.std_error, s.boundary_fraction, s.flat_fraction, s.trials};
  });
}

} // extern "C"
