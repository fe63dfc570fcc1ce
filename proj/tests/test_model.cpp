#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bspade/model.hpp"
#include "bspade/overlap.hpp"
#include "bspade/specfun.hpp"
#include "oracles.hpp"

using namespace bspade;

namespace {

const SchmidtModel& model015()
{
  static const SchmidtModel m(0.15);
  return m;
}

double offdiag_mass(const ProbabilityMatrix& p)
{
  double s = 0.0;
  for (std::size_t i = 0; i < p.entries.size(); ++i) {
    const auto o = p.space.outcome(i);
    if (!(o.signal == o.idler))
      s += p.entries[i];
  }
  return s;
}

} // namespace

TEST_CASE("ModeSpace")
{
  const auto sq = ModeSpace::square(6);
  CHECK(sq.size() == 49);
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const auto o = sq.outcome(i);
    CHECK(sq.index_of(o.signal, o.idler) == i);
  }
  CHECK(sq.outcome(1).signal == Mode{1, 0});
  CHECK(sq.outcome(1).idler == Mode{0, 0});
  CHECK_FALSE(sq.index_of({7, 0}, {0, 0}).has_value());
  CHECK_THROWS_AS(ModeSpace({{0, 0}, {0, 0}}, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(ModeSpace({{-1, 0}}, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(ModeSpace({}, {{0, 0}}), std::invalid_argument);
}

TEST_CASE("coincidence_prob: zero separation")
{
  const auto& sm = model015();
  for (int k = 0; k <= 6; ++k)
    for (int kp = 0; kp <= 6; ++kp)
      for (int l = 0; l <= 2; ++l) {
        const double p = coincidence_prob(k, l, kp, l, 0.0, sm);
        if (k == kp)
          CHECK(p == doctest::Approx(oracle::schmidt_sq(k, l, 0.15)).epsilon(1e-13));
        else
          CHECK(p == 0.0);
      }
}

TEST_CASE("coincidence_prob: quadrature oracle")
{
  const auto& sm = model015();
  const double d = 0.2;
  const double plus = specfun::quad_overlap(0, 1, -d), minus = specfun::quad_overlap(0, 1, d);
  const double want = 0.5 * oracle::schmidt_sq(1, 0, 0.15) * (plus * plus + minus * minus);
  CHECK(want == doctest::Approx(0.0022044356007932065).epsilon(1e-12));
  CHECK(std::abs(coincidence_prob(0, 0, 1, 0, d, sm) - want) < 1e-10);
}

TEST_CASE("coincidence_prob: selection rule, evenness and exchange structure")
{
  const auto& sm = model015();
  oracle::Gen gen(21);
  for (int t = 0; t < 300; ++t) {
    const int k = gen.integer(0, 8), kp = gen.integer(0, 8);
    const int l = gen.integer(0, 4), lp = gen.integer(0, 4);
    const double d = gen.uniform(0.0, 2.0);
    const double p = coincidence_prob(k, l, kp, lp, d, sm);
    CHECK(p >= 0.0);
    if (l != lp) {
      CHECK(p == 0.0);
      continue;
    }
    CHECK(coincidence_prob(k, l, kp, l, -d, sm) == doctest::Approx(p).epsilon(1e-13));
    // Overlap part is symmetric under k <-> k'.
    const double a = p / sm.coeff_sq(kp, l);
    const double b = coincidence_prob(kp, l, k, l, d, sm) / sm.coeff_sq(k, l);
    CHECK(a == doctest::Approx(b).epsilon(1e-11));
    // And it does not depend on l.
    const int l2 = gen.integer(0, 4);
    CHECK(coincidence_prob(k, l2, kp, l2, d, sm) / sm.coeff_sq(kp, l2) == doctest::Approx(a).epsilon(1e-11));
  }
}

TEST_CASE("small_sep_prob")
{
  const auto& sm = model015();
  for (int k = 0; k <= 6; ++k)
    for (int kp = 0; kp <= 6; ++kp)
      CHECK(small_sep_prob(k, 0, kp, 0, 0.0, sm) == (k == kp ? doctest::Approx(sm.coeff_sq(k, 0)) : doctest::Approx(0.0)));

  const double d = 0.1;
  CHECK(small_sep_prob(1, 0, 0, 0, d, sm) == doctest::Approx(sm.coeff_sq(0, 0) * d * d / 2).epsilon(1e-14));

  // Error shrinks like d^4 on and off the diagonal.
  for (auto [k, kp] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{2, 3}, std::pair{4, 4}}) {
    double prev_ratio = -1.0;
    for (double dd : {0.2, 0.1, 0.05, 0.02, 0.01}) {
      const double err = std::abs(small_sep_prob(k, 0, kp, 0, dd, sm) - coincidence_prob(k, 0, kp, 0, dd, sm));
      const double ratio = err / std::pow(dd, 4);
      CHECK(ratio < 50.0 * sm.coeff_sq(kp, 0) * (kp + 1) * (kp + 1));
      if (prev_ratio > 0.0)
        CHECK(ratio == doctest::Approx(prev_ratio).epsilon(0.1));
      prev_ratio = ratio;
    }
  }
  // Neighbour entries are O(d^2), so their relative error is O(d^2).
  for (auto [k, kp] : {std::pair{1, 0}, std::pair{5, 6}}) {
    const auto rel = [&](double dd) {
      const double exact = coincidence_prob(k, 0, kp, 0, dd, sm);
      return std::abs(small_sep_prob(k, 0, kp, 0, dd, sm) - exact) / exact;
    };
    CHECK(std::log(rel(1e-2) / rel(1e-3)) / std::log(10.0) == doctest::Approx(2.0).epsilon(0.02));
  }
  CHECK(small_sep_prob(0, 0, 3, 0, 0.1, sm) == 0.0);
  CHECK(small_sep_prob(0, 0, 0, 1, 0.1, sm) == 0.0);
}

TEST_CASE("prob_matrix")
{
  const auto& sm = model015();
  const auto space = ModeSpace::square(6);
  const auto p0 = prob_matrix(0.0, space, sm);
  CHECK(p0.renormalized);
  CHECK(p0.sum() == doctest::Approx(1.0).epsilon(1e-12));
  double diag_total = 0.0;
  for (int k = 0; k <= 6; ++k)
    diag_total += sm.coeff_sq(k, 0);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      CHECK(p0.at(i, j) == (i == j ? doctest::Approx(sm.coeff_sq(int(i), 0) / diag_total) : doctest::Approx(0.0)));

  double prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    const double d = 0.0465 * i;
    const auto p = prob_matrix(d, space, sm);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    const double off = offdiag_mass(p);
    CHECK(off > prev);
    prev = off;
  }
  const auto far = prob_matrix(0.93, space, sm);
  CHECK(far.at(0, 1) > 0.01);
  CHECK(far.at(1, 0) > 0.01);

  for (int i = 0; i <= 29; ++i) {
    const auto raw = prob_matrix(0.0465 * i, space, sm, false);
    CHECK_FALSE(raw.renormalized);
    CHECK(raw.sum() <= 1.0 + 1e-12);
    for (double v : raw.entries)
      CHECK(v >= 0.0);
  }

  const auto wide = ModeSpace::square(3, 2);
  const auto pw = prob_matrix(0.7, wide, sm);
  for (std::size_t i = 0; i < wide.size(); ++i) {
    const auto o = wide.outcome(i);
    if (o.signal.l != o.idler.l)
      CHECK(pw.entries[i] == 0.0);
  }
  const auto pp = prob_matrix(0.4, space, sm);
  const auto pm = prob_matrix(-0.4, space, sm);
  for (std::size_t i = 0; i < pp.entries.size(); ++i)
    CHECK(pp.entries[i] == doctest::Approx(pm.entries[i]).epsilon(1e-13));

  // Signal modes that never meet the idler's l have no mass.
  const ModeSpace empty({{0, 1}}, {{0, 0}});
  CHECK_THROWS_AS(prob_matrix(0.3, empty, sm), std::domain_error);
}

TEST_CASE("apply_calibration")
{
  const auto& sm = model015();
  const auto space = ModeSpace::square(6);
  const auto p = prob_matrix(0.3, space, sm);

  const auto same = apply_calibration(p, CalibrationModel::identity(p.entries.size()));
  for (std::size_t i = 0; i < p.entries.size(); ++i)
    CHECK(same.entries[i] == doctest::Approx(p.entries[i]).epsilon(1e-14));

  CalibrationModel half{std::vector<double>(49, 0.5), std::vector<double>(49, 0.0)};
  const auto scaled = apply_calibration(p, half);
  for (std::size_t i = 0; i < p.entries.size(); ++i)
    CHECK(scaled.entries[i] == doctest::Approx(p.entries[i]).epsilon(1e-14));

  CalibrationModel neg{std::vector<double>(49, 1.0), std::vector<double>(49, 0.0)};
  neg.alpha[0] = -5.0;
  const auto floored = apply_calibration(p, neg);
  CHECK(floored.entries[0] == 0.0);
  CHECK(floored.sum() == doctest::Approx(1.0).epsilon(1e-14));

  CalibrationModel zero{std::vector<double>(49, 0.0), std::vector<double>(49, 0.0)};
  CHECK_THROWS_AS(apply_calibration(p, zero), std::domain_error);
  CHECK_THROWS_AS(apply_calibration(p, CalibrationModel::identity(10)), std::invalid_argument);
}

TEST_CASE("marginal_intensity")
{
  const SchmidtModel g1(1.0);
  const auto& sm = model015();
  oracle::Gen gen(8);
  for (int t = 0; t < 100; ++t) {
    const double x = gen.uniform(-5.0, 5.0), d = gen.uniform(0.0, 1.5);
    CHECK(marginal_intensity(x, d, g1, PsfKind::Spdc) ==
          doctest::Approx(marginal_intensity(x, d, g1, PsfKind::Gaussian)).epsilon(1e-13));
    for (PsfKind kind : {PsfKind::Gaussian, PsfKind::Spdc})
      CHECK(marginal_intensity(-x, d, sm, kind) == doctest::Approx(marginal_intensity(x, d, sm, kind)).epsilon(1e-12));
  }

  // Reduced state of the two-mode squeezed form is Gaussian with variance
  // (1 + q) / (2 (1 - q)).
  const double var = 0.5 * (1.0 + sm.q()) / (1.0 - sm.q());
  auto gauss = [&](double x) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var); };
  for (double d : {0.0, 0.3, 1.1})
    for (double x : {-3.0, -0.5, 0.0, 0.8, 2.2}) {
      const double want = 0.5 * (gauss(x - d) + gauss(x + d));
      CHECK(std::abs(marginal_intensity(x, d, sm, PsfKind::Spdc) - want) < 1e-10);
    }

  for (PsfKind kind : {PsfKind::Gaussian, PsfKind::Spdc})
    for (double d : {0.0, 0.6, 1.35}) {
      const double norm = oracle::trapezoid([&](double x) { return marginal_intensity(x, d, sm, kind); }, -25.0, 25.0, 10000);
      CHECK(std::abs(norm - 1.0) < 1e-8);
    }
}

TEST_CASE("PixelGrid and pixel_probs")
{
  const PixelGrid grid;
  const auto edges = grid.edges();
  REQUIRE(edges.size() == 51);
  for (std::size_t i = 1; i < edges.size(); ++i)
    CHECK(edges[i] > edges[i - 1]);
  CHECK_THROWS(PixelGrid{0, -1.0, 1.0}.validate());
  CHECK_THROWS(PixelGrid{5, 1.0, 1.0}.validate());

  const auto& sm = model015();
  const auto p0 = pixel_probs(0.0, grid, sm, PsfKind::Gaussian);
  REQUIRE(p0.size() == 51);
  for (int i = 0; i < 25; ++i)
    CHECK(p0[i] == doctest::Approx(p0[49 - i]).epsilon(1e-12));
  CHECK(p0[24] == doctest::Approx(*std::max_element(p0.begin(), p0.begin() + 50)).epsilon(1e-14));

  for (PsfKind kind : {PsfKind::Gaussian, PsfKind::Spdc})
    for (double d : {0.0, 0.4, 1.35}) {
      const auto p = pixel_probs(d, grid, sm, kind);
      double sum = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) < 1e-14);

      // Midpoint Riemann sum with 10^4 points over the span.
      const int n = 10000;
      const double h = (grid.hi - grid.lo) / n;
      std::vector<double> want(50, 0.0);
      for (int j = 0; j < n; ++j) {
        const double x = grid.lo + (j + 0.5) * h;
        want[std::min(49, int((x - grid.lo) / (edges[1] - edges[0])))] += marginal_intensity(x, d, sm, kind) * h;
      }
      double max_dev = 0.0;
      for (int i = 0; i < 50; ++i)
        max_dev = std::max(max_dev, std::abs(p[i] - want[i]));
      CHECK(max_dev < 1e-6);
    }
}

TEST_CASE("forward models")
{
  const auto& sm = model015();
  const auto space = ModeSpace::square(6);
  const auto f = spade_forward(space, sm);
  const auto v = f(0.25);
  const auto m = prob_matrix(0.25, space, sm);
  REQUIRE(v.size() == m.entries.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(v[i] == m.entries[i]);

  const auto g = direct_forward(PixelGrid{}, sm, PsfKind::Spdc);
  CHECK(g(0.5).size() == 51);
}
