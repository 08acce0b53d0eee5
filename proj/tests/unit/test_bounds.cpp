// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "wishart/bounds.hpp"
#include "wishart/error.hpp"

using namespace wishart;
using std::numbers::e;

namespace {

RateInputs inputs(double c, double r, double star, double p1, double p2) { return {c, r, star, p1, p2}; }

double term(const BoundReport& report, std::string_view name) {
  for (const auto& [k, v] : report.terms)
    if (k == name) return v;
  FAIL("missing term " << name);
  return 0.0;
}

}  // namespace

TEST_CASE("constants match their closed forms") {
  // eps1 = 0.1: 1 / log 1.1 = 10.49..., ceiling 11.
  CHECK(ceil_inverse_log(0.1) == 11.0);
  CHECK(gaussian_c1(0.1) == doctest::Approx(10.0 * 1.1 * std::sqrt(11.0)).epsilon(1e-15));
  CHECK(gaussian_c2(0.1, 0.1) == doctest::Approx(1.1 * 11.0 * (250.0 + 24.0)).epsilon(1e-15));
  // eps1 = e - 1: 1 / log e = 1 exactly, so C1 = 10e and C2(., 1) = 49e.
  CHECK(ceil_inverse_log(e - 1.0) == 1.0);
  CHECK(gaussian_c1(e - 1.0) == doctest::Approx(10.0 * e).epsilon(1e-15));
  CHECK(gaussian_c2(e - 1.0, 1.0) == doctest::Approx(49.0 * e).epsilon(1e-15));
  // eps1 = 3: 1 / log 4 = 0.72..., ceiling 1.
  CHECK(ceil_inverse_log(3.0) == 1.0);
  CHECK(gaussian_c1(3.0) == 40.0);
  CHECK(gaussian_c2(3.0, 0.5) == doctest::Approx(4.0 * (50.0 + 24.0)).epsilon(1e-15));
  CHECK_THROWS_AS(gaussian_c1(0.0), ValidationError);
  CHECK_THROWS_AS(gaussian_c2(0.1, -1.0), ValidationError);
}

TEST_CASE("gaussian upper bound examples") {
  const auto zero_star = gaussian_upper_bound(inputs(2, 3, 0, 10, 10), 0.1, 0.2);
  CHECK(zero_star.value == doctest::Approx(1.1 * (12.0 + 1.2 * 4.0)).epsilon(1e-14));
  const auto p_one = gaussian_upper_bound(inputs(1, 1, 1, 1, 50), 0.1, 0.2);
  CHECK(p_one.value == doctest::Approx(1.1 * (2.0 + 1.2)).epsilon(1e-14));

  const auto r = gaussian_upper_bound(inputs(1, 1, 1, 3, 3), e - 1.0, 1.0);
  const double l3 = std::log(3.0);
  const double expected = e * (4.0 + 10.0 * e * std::sqrt(l3) + 49.0 * e * l3);
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-14));
  CHECK(r.value == doctest::Approx(486.0889863738665).epsilon(1e-13));
  CHECK_FALSE(r.rate_only);
  CHECK(term(r, "cross") == 2.0);
  CHECK(term(r, "column") == 2.0);
  CHECK_THROWS_AS(gaussian_upper_bound(inputs(1, 1, 1, 3, 3), 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(gaussian_upper_bound(inputs(1, 1, 1, 3, 3), 0.1, -2.0), ValidationError);
}

TEST_CASE("baseline bounds") {
  const auto a = baseline_bounds(inputs(1, 1, 0, 5, 5));
  CHECK(a.symmetrization.value == 4.0);
  CHECK(a.symmetrization.rate_only);
  CHECK(baseline_bounds(inputs(1, 1, 1, 5, 1)).matrix_sum.value == 0.0);
  const double p = std::exp(2.0);
  const auto b = baseline_bounds(inputs(2, 3, 1, p, p));
  CHECK(b.symmetrization.value == doctest::Approx(std::pow(5.0 + std::sqrt(2.0), 2)).epsilon(1e-14));
  CHECK(b.matrix_sum.value == doctest::Approx(6.0 * std::sqrt(2.0) + 4.0 * 4.0).epsilon(1e-14));
}

TEST_CASE("unified bound families") {
  UnifiedParams sub;
  CHECK(unified_bound(inputs(2, 3, 0, 9, 9), sub).value == doctest::Approx(25.0 - 9.0));

  UnifiedParams heavy;
  heavy.family = UnifiedFamily::kHeavyTail;
  heavy.alpha = 2.0;
  const auto s = inputs(1.5, 2.5, 0.7, 20, 80);
  CHECK(unified_bound(s, heavy).value == doctest::Approx(unified_bound(s, sub).value).epsilon(1e-14));

  heavy.alpha = 1.0;
  CHECK(unified_bound(inputs(2, 3, 1, e, e), heavy).value == doctest::Approx(36.0 - 9.0).epsilon(1e-14));

  UnifiedParams bounded;
  bounded.family = UnifiedFamily::kBounded;
  bounded.bound = 2.0;
  bounded.eps = 0.5;
  const auto rb = unified_bound(inputs(1, 1, 1, e, e), bounded);
  CHECK(rb.value == doctest::Approx(1.5 * (16.0 - 1.0)).epsilon(1e-14));
  CHECK(rb.rate_only);

  UnifiedParams gauss;
  gauss.family = UnifiedFamily::kGaussian;
  gauss.eps = 0.1;
  CHECK(unified_bound(inputs(1, 1, 1, e, e), gauss).value == doctest::Approx(1.1 * 8.0).epsilon(1e-14));

  heavy.alpha.reset();
  CHECK_THROWS_AS(unified_bound(s, heavy), ValidationError);
  bounded.bound.reset();
  CHECK_THROWS_AS(unified_bound(s, bounded), ValidationError);
  heavy.alpha = 3.0;
  CHECK_THROWS_AS(unified_bound(s, heavy), ValidationError);
}

TEST_CASE("moment and tail") {
  CHECK(moment_and_tail(inputs(1, 2, 1, 5, 5), 2.0, 0.0, 1.0).tail_prob == 1.0);
  CHECK(moment_and_tail(inputs(1, 2, 0, 5, 5), 17.0, 1.0, 1.0).moment_bound == doctest::Approx(9.0 - 1.0));
  CHECK(moment_and_tail(inputs(1, 1, 1, e, e), 4.0, 1.0, 1.0).moment_bound == doctest::Approx(15.0).epsilon(1e-14));
  const auto mt = moment_and_tail(inputs(1, 1, 1, e, e), 4.0, 2.0, 10.0);
  CHECK(mt.tail_threshold == doctest::Approx(10.0 * (25.0 - 1.0)).epsilon(1e-14));
  CHECK(mt.tail_prob == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));

  // At b = log(p_min) the maximum inside the root is inactive.
  const auto s = inputs(3, 4, 0.8, 40, 70);
  const double b = std::log(40.0);
  const double expected = std::pow(7.0 + 0.8 * std::sqrt(b), 2) - 9.0;
  CHECK(moment_and_tail(s, b, 0.0, 1.0).moment_bound == doctest::Approx(expected).epsilon(1e-14));
  CHECK(moment_and_tail(s, 0.5 * b, 0.0, 1.0).moment_bound == doctest::Approx(expected).epsilon(1e-14));

  const auto report = to_report(mt, 4.0, 2.0, 10.0);
  CHECK(report.bound_id == BoundId::kMomentTail);
  CHECK(report.rate_only);
  CHECK_THROWS_AS(moment_and_tail(s, 0.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(moment_and_tail(s, 1.0, -1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(moment_and_tail(s, 1.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("structured rates") {
  const std::size_t p = 30, n = 70;
  const std::vector<double> ones_p(p, 1.0), ones_n(n, 1.0);
  CHECK(structured_rows_rate(ones_p, n) == doctest::Approx(p + std::sqrt(double(n * p))).epsilon(1e-14));
  CHECK(structured_columns_rate(ones_n, p) == doctest::Approx(std::sqrt(double(p * n)) + p).epsilon(1e-14));
  CHECK(structured_rows_rate(std::vector<double>(4, 0.0), 3) == 0.0);
  CHECK(structured_columns_rate(std::vector<double>(4, 0.0), 3) == 0.0);

  const std::vector<double> sig = {0.5, 1.0, 2.0};
  const auto rows = structured_rates(homoskedastic_rows(sig, 6), StructureKind::kRows);
  CHECK(rows.bound_id == BoundId::kStructuredRows);
  CHECK(rows.value == doctest::Approx(5.25 + std::sqrt(6.0 * 5.25) * 2.0).epsilon(1e-14));
  const auto cols = structured_rates(homoskedastic_columns(sig, 6), StructureKind::kColumns);
  CHECK(cols.value == doctest::Approx(std::sqrt(6.0 * (0.0625 + 1.0 + 16.0)) + 6.0 * 4.0).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(structured_rates(homoskedastic_rows(sig, 6), StructureKind::kColumns),
                       doctest::Contains("wrong structure kind"), ValidationError);
  CHECK_THROWS_AS(structured_rates(homoskedastic_columns(sig, 6), StructureKind::kRows), ValidationError);
}

TEST_CASE("lower bound rate") {
  CHECK(lower_bound_rate(inputs(1, 1, 1, 1, 1)).value == 2.0);
  // Minimal admissible sigma_* with p_min = 1: the log terms vanish.
  CHECK(lower_bound_rate(inputs(2, 1, 1, 4, 1)).value == doctest::Approx(4.0 + 2.0));
  const double p = 50;
  const double root = std::sqrt(p);
  CHECK(lower_bound_rate(inputs(root, root, 1, p, p)).value ==
        doctest::Approx(2 * p + std::sqrt(p * std::log(p)) + std::log(p)).epsilon(1e-14));
  CHECK_THROWS_AS(lower_bound_rate(inputs(1, 1, 2, 4, 4)), ValidationError);
  CHECK_THROWS_AS(lower_bound_rate(inputs(4, 4, 1, 4, 4)), ValidationError);
}

TEST_CASE("clustering rates") {
  CHECK(snr_threshold(100, 0, 0) == 0.0);
  const auto zero = clustering_rates(2.0, 100, 0.0, 0.0);
  CHECK(zero.upper_rate == 0.0);
  CHECK(zero.snr_threshold == 0.0);
  const std::size_t dim = 256;
  const double st = sigma_tilde(std::vector<double>(dim, 1.0));
  CHECK(st == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(snr_threshold(16, 1.0, st) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(snr_threshold(1024, 1.0, st) == 1.0);
  double previous = 1.0;
  for (double mu : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    const double rate = clustering_rates(mu, 50, 1.0, 2.0).upper_rate;
    CHECK(rate <= previous);
    CHECK(rate <= 1.0);
    previous = rate;
  }
  CHECK(previous < 1e-5);
  CHECK_THROWS_AS(clustering_rates(0.0, 10, 1.0, 1.0), ValidationError);
}

TEST_CASE("bounds are monotone in each scale") {
  UnifiedParams heavy;
  heavy.family = UnifiedFamily::kHeavyTail;
  heavy.alpha = 0.8;
  const double grid[] = {0.0, 0.3, 1.0, 2.5};
  const double h = 1e-3;
  for (double c : grid)
    for (double r : grid)
      for (double st : grid) {
        const auto base = inputs(c, r, st, 30, 45);
        auto evals = [](const RateInputs& x, const UnifiedParams& hp) {
          return std::array<double, 6>{gaussian_upper_bound(x, 0.1, 0.1).value,
                                       baseline_bounds(x).symmetrization.value,
                                       baseline_bounds(x).matrix_sum.value,
                                       unified_bound(x, UnifiedParams{}).value,
                                       unified_bound(x, hp).value,
                                       moment_and_tail(x, 3.0, 1.0, 1.0).moment_bound};
        };
        const auto v0 = evals(base, heavy);
        for (int axis = 0; axis < 3; ++axis) {
          auto up = base;
          (axis == 0 ? up.sigma_C : axis == 1 ? up.sigma_R : up.sigma_star) += h;
          const auto v1 = evals(up, heavy);
          for (std::size_t k = 0; k < v0.size(); ++k) CHECK(v1[k] >= v0[k]);
        }
      }
}

TEST_CASE("reports serialize with their breakdown") {
  const auto j = to_json(gaussian_upper_bound(inputs(1, 1, 1, 3, 3), 0.1, 0.1));
  CHECK(j.at("bound_id") == "gaussian");
  CHECK(j.at("terms").contains("cross"));
  CHECK(j.at("params").contains("C1"));
  CHECK(j.at("value").get<double>() > 0.0);
  CHECK(bound_id_from_string("structured_rows") == BoundId::kStructuredRows);
  CHECK_THROWS_AS(bound_id_from_string("nope"), ValidationError);
}
