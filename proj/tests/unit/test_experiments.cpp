// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wishart/error.hpp"
#include "wishart/experiments.hpp"
#include "wishart/parallel.hpp"

using namespace wishart;

namespace {

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// E|G^2 - 1|, split at the kink x = 1.
double expected_abs_chi_minus_one() {
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [](double x) { return std::abs(x * x - 1.0) * phi(x); };
  const double inner = gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
  const double outer =
      gauss_kronrod<double, 61>::integrate(f, 1.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
  return 2.0 * (inner + outer);
}

}  // namespace

TEST_CASE("replicate summary") {
  const std::vector<double> v = {4.0, 1.0, 3.0, 2.0, 5.0};
  const auto e = summarize_replicates(v);
  CHECK(e.mean == 3.0);
  CHECK(e.std_err == doctest::Approx(std::sqrt(2.5 / 5.0)).epsilon(1e-15));
  CHECK(e.n_reps == 5);
  // Type-7: h = (n - 1) p; sorted values 1..5, so quantile(p) = 1 + 4p.
  REQUIRE(e.quantiles.size() == kDefaultQuantiles.size());
  for (const auto& [prob, val] : e.quantiles) CHECK(val == doctest::Approx(1.0 + 4.0 * prob).epsilon(1e-15));
  CHECK_THROWS_AS(summarize_replicates(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("zero profile concentration is exactly zero") {
  const auto e = estimate_concentration(VarianceProfile::zeros(5, 8), noise::Gaussian{}, 6, 1);
  CHECK(e.mean == 0.0);
  CHECK(e.std_err == 0.0);
  for (const auto& q : e.quantiles) CHECK(q.second == 0.0);
}

TEST_CASE("scalar case matches E|G^2 - 1|") {
  const double truth = expected_abs_chi_minus_one();
  // Closed form 4 phi(1) cross-checks the quadrature itself.
  CHECK(truth == doctest::Approx(4.0 * phi(1.0)).epsilon(1e-10));
  const auto e = estimate_concentration(VarianceProfile::ones(1, 1), noise::Gaussian{}, 20000, 12);
  CHECK(std::abs(e.mean - truth) <= 5.0 * e.std_err);
}

TEST_CASE("results do not depend on the thread count") {
  const auto p = random_uniform_profile(70, 40, 0.0, 1.0, 5);
  const auto a = replicate_norms(p, noise::Gaussian{}, 12, 99, {1, kDefaultSpectralTol});
  const auto b = replicate_norms(p, noise::Gaussian{}, 12, 99, {8, kDefaultSpectralTol});
  CHECK(a == b);

  SweepSpec spec;
  spec.grid = random_grid(6, 2, 90, 7);
  spec.n_reps = 4;
  spec.seed = 7;
  const auto rows1 = rate_sweep(spec, {1, kDefaultSpectralTol});
  const auto rows8 = rate_sweep(spec, {8, kDefaultSpectralTol});
  CHECK(sweep_csv(spec, rows1) == sweep_csv(spec, rows8));

  const std::vector<double> sig(30, 1.0), lambdas = {0.0, 2.0, 6.0};
  CHECK(phase_diagram_csv(phase_diagram(40, 30, sig, lambdas, 5, 3, {1, kDefaultSpectralTol})) ==
        phase_diagram_csv(phase_diagram(40, 30, sig, lambdas, 5, 3, {8, kDefaultSpectralTol})));
}

TEST_CASE("standard error follows the square-root law") {
  const auto p = VarianceProfile::ones(10, 10);
  const auto small = estimate_concentration(p, noise::Gaussian{}, 400, 31);
  const auto large = estimate_concentration(p, noise::Gaussian{}, 800, 31);
  const double ratio = small.std_err / large.std_err;
  CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.3));
}

TEST_CASE("mean is invariant under permuting the profile") {
  const auto p = random_uniform_profile(12, 9, 0.0, 1.0, 77);
  std::vector<std::size_t> rp(12), cp(9);
  std::iota(rp.begin(), rp.end(), 0);
  std::iota(cp.begin(), cp.end(), 0);
  std::reverse(rp.begin(), rp.end());
  std::rotate(cp.begin(), cp.begin() + 4, cp.end());
  const auto a = estimate_concentration(p, noise::Gaussian{}, 400, 1);
  const auto b = estimate_concentration(p.permuted(rp, cp), noise::Gaussian{}, 400, 2);
  CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_err, b.std_err));
}

TEST_CASE("tail frequencies") {
  const auto p = VarianceProfile::ones(20, 20);
  const std::vector<double> xs = {0.0, 0.5, 1.0, 2.0, 4.0};
  const auto pts = tail_empirics(p, noise::Gaussian{}, 200, 9, xs, 1e-3);
  REQUIRE(pts.size() == xs.size());
  for (std::size_t k = 1; k < pts.size(); ++k) {
    CHECK(pts[k].frequency <= pts[k - 1].frequency);
    CHECK(pts[k].threshold > pts[k - 1].threshold);
  }
  const auto huge = tail_empirics(p, noise::Gaussian{}, 50, 9, std::vector<double>{0.0}, 1e6);
  CHECK(huge[0].frequency == 0.0);
  CHECK(huge[0].tail_prob == 1.0);
  CHECK(huge[0].binomial_se == 0.0);

  const std::vector<double> norms = {1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(VarianceProfile::zeros(2, 2));
  // With a zero profile the threshold is C x^2; x = sqrt(2), C = 1 gives exactly 2, counted as reached.
  const auto f = tail_frequencies(s, norms, std::vector<double>{std::sqrt(2.0)}, 1.0);
  CHECK(f[0].threshold == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f[0].exceedances == (f[0].threshold <= 2.0 ? 3u : 2u));
}

TEST_CASE("random grids and sweep profiles") {
  const auto g = random_grid(200, 2, 200, 4);
  CHECK(g == random_grid(200, 2, 200, 4));
  bool low = false, high = false;
  for (const auto& pt : g) {
    CHECK(pt.p1 >= 2);
    CHECK(pt.p1 <= 200);
    CHECK(pt.p2 >= 2);
    CHECK(pt.p2 <= 200);
    low = low || pt.p1 < 50;
    high = high || pt.p1 > 150;
  }
  CHECK((low && high));
  CHECK_THROWS_AS(random_grid(3, 10, 5, 1), ValidationError);

  SweepSpec spec;
  spec.family = SweepFamily::kHomoskedasticRows;
  spec.grid = {{5, 7}};
  spec.seed = 3;
  const auto p = sweep_profile(spec, 0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 1; j < 7; ++j) CHECK(p(i, j) == p(i, 0));
  spec.family = SweepFamily::kOnes;
  CHECK(sweep_profile(spec, 0) == VarianceProfile::ones(5, 7));
}

TEST_CASE("single grid point sweep reduces to one estimate plus one bound") {
  SweepSpec spec;
  spec.family = SweepFamily::kOnes;
  spec.grid = {{30, 20}};
  spec.n_reps = 5;
  spec.seed = 11;
  const auto rows = rate_sweep(spec);
  REQUIRE(rows.size() == 1);
  const auto p = VarianceProfile::ones(30, 20);
  const auto e = estimate_concentration(p, noise::Gaussian{}, 5, derive_seed(11, 0));
  CHECK(rows[0].estimate.mean == e.mean);
  const double bound = gaussian_upper_bound(rate_inputs(summarize(p)), 0.1, 0.1).value;
  CHECK(rows[0].bound == bound);
  CHECK(rows[0].ratio == e.mean / bound);
  const auto csv = sweep_csv(spec, rows);
  CHECK(csv.rfind("index,family,model,p1,p2,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("misclassification") {
  const std::vector<int> l = {1, -1, 1, 1};
  const std::vector<int> flip = {-1, 1, -1, -1};
  const std::vector<int> two = {1, 1, -1, 1};
  CHECK(misclassification(l, l) == 0.0);
  CHECK(misclassification(l, flip) == 0.0);
  const std::vector<int> half = {-1, 1, 1, 1};
  CHECK(misclassification(l, half) == 0.5);
  CHECK(misclassification(l, two) == misclassification(flip, two));
  const std::vector<int> lp = {1, 1, -1, 1}, tp = {1, -1, 1, 1};  // same permutation of (l, two)
  CHECK(misclassification(lp, tp) == misclassification(l, two));
  CHECK_THROWS_AS(misclassification(l, std::vector<int>{1, 1}), ValidationError);
  CHECK_THROWS_AS(misclassification(l, std::vector<int>{1, 0, 1, 1}), ValidationError);
}

TEST_CASE("mixture generation") {
  ClusteringInstance inst;
  inst.n = 6;
  inst.p = 3;
  inst.mu = Vector::Zero(3);
  inst.mu << 1.0, -2.0, 0.5;
  inst.labels = draw_labels(6, 5);
  inst.sigmas = {0.0, 0.0, 0.0};
  const Matrix y = generate_mixture(inst, 1);
  for (std::size_t j = 0; j < 6; ++j) CHECK(y.row(j).transpose() == inst.labels[j] * inst.mu);
  CHECK(generate_mixture(inst, 1) == y);

  inst.n = 20000;
  inst.mu = Vector::Zero(3);
  inst.labels = draw_labels(20000, 5);
  inst.sigmas = {0.5, 1.0, 2.0};
  const Matrix noise = generate_mixture(inst, 9);
  for (int i = 0; i < 3; ++i) {
    const double var = noise.col(i).squaredNorm() / 20000.0;
    const double target = inst.sigmas[i] * inst.sigmas[i];
    CHECK(std::abs(var - target) <= 5.0 * target * std::sqrt(2.0 / 20000.0));
  }
  inst.labels[0] = 0;
  CHECK_THROWS_AS(validate(inst), ValidationError);
}

TEST_CASE("spectral clustering without noise") {
  ClusteringInstance inst;
  inst.n = 2;
  inst.p = 4;
  inst.mu = Vector::Ones(4);
  inst.labels = {1, -1};
  inst.sigmas.assign(4, 0.0);
  const auto two = spectral_cluster(generate_mixture(inst, 0));
  CHECK((two == std::vector<int>{1, -1} || two == std::vector<int>{-1, 1}));

  inst.n = 50;
  inst.labels = draw_labels(50, 8);
  const auto hat = spectral_cluster(generate_mixture(inst, 0));
  CHECK(misclassification(inst.labels, hat) == 0.0);
  CHECK_THROWS_AS(spectral_cluster(Matrix::Ones(1, 3)), ValidationError);
}

TEST_CASE("phase diagram trend") {
  const std::vector<double> sig(60, 1.0);
  const std::vector<double> lambdas = {0.0, 10.0};
  const auto d = phase_diagram(120, 60, sig, lambdas, 10, 21);
  CHECK(d.snr_threshold == doctest::Approx(std::max(1.0, std::pow(60.0 / 120.0, 0.25) * 1.0)));
  CHECK(d.points[0].mean_misclassification > 0.3);
  CHECK(d.points[0].mean_misclassification < 0.5);
  CHECK(!d.points[0].upper_rate.has_value());
  CHECK(d.points[1].mean_misclassification < 0.05);
  CHECK(d.points[1].upper_rate.has_value());
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  std::vector<int> out(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { out[i] = static_cast<int>(i); });
  CHECK(std::accumulate(out.begin(), out.end(), 0) == 4950);
  try {
    parallel_for(10, 1, [](std::size_t i) {
      if (i >= 3) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "3");
  }
}
