// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "wishart/wishart.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  wc_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and constants") {
  CHECK(std::string(wc_version()) == "1.0.0");
  char* table = nullptr;
  REQUIRE(wc_constants_table(&table) == WC_OK);
  CHECK(take(table).find("C1") != std::string::npos);
}

TEST_CASE("profile handles") {
  const double sigma[] = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
                          1, 1, 1, 1, 1, 1};
  wc_profile* p = nullptr;
  REQUIRE(wc_profile_create(4, 9, sigma, &p) == WC_OK);
  size_t p1 = 0, p2 = 0;
  REQUIRE(wc_profile_dims(p, &p1, &p2) == WC_OK);
  CHECK(p1 == 4);
  CHECK(p2 == 9);
  wc_summary s{};
  REQUIRE(wc_profile_summarize(p, &s) == WC_OK);
  CHECK(s.sigma_C == 2.0);
  CHECK(s.sigma_R == 3.0);
  CHECK(s.sigma_star == 1.0);

  char* json = nullptr;
  REQUIRE(wc_profile_to_json(p, &json) == WC_OK);
  wc_profile* back = nullptr;
  REQUIRE(wc_profile_from_json(json, &back) == WC_OK);
  wc_string_free(json);
  std::vector<double> copy(36);
  REQUIRE(wc_profile_copy_sigma(back, copy.data(), copy.size()) == WC_OK);
  CHECK(std::memcmp(copy.data(), sigma, sizeof sigma) == 0);
  CHECK(wc_profile_copy_sigma(back, copy.data(), 3) == WC_ERR_INVALID);
  wc_profile_free(back);
  wc_profile_free(p);
  wc_profile_free(nullptr);
}

TEST_CASE("status codes and last error") {
  const double bad[] = {1.0, -1.0};
  wc_profile* p = nullptr;
  CHECK(wc_profile_create(1, 2, bad, &p) == WC_ERR_INVALID);
  CHECK(p == nullptr);
  CHECK(std::strlen(wc_last_error()) > 0);
  CHECK(wc_profile_create(1, 2, nullptr, &p) == WC_ERR_INVALID);
  CHECK(wc_profile_from_json("{oops", &p) == WC_ERR_INVALID);

  double v = 0.0;
  CHECK(wc_gaussian_moment(0, 40, &v) == WC_ERR_SIZE);
  CHECK(std::string(wc_last_error()).find("64") != std::string::npos);
  REQUIRE(wc_gaussian_moment(2, 1, &v) == WC_OK);
  CHECK(v == 2.0);

  wc_profile* big = nullptr;
  REQUIRE(wc_profile_random_uniform(20, 20, 0.0, 1.0, 1, 0, &big) == WC_OK);
  CHECK(wc_exact_trace_moment(big, 4, &v) == WC_ERR_SIZE);
  wc_profile_free(big);

  const double asym[] = {1.0, 0.5, 0.0, 1.0};
  CHECK(wc_spectral_norm(asym, 2, 1e-8, &v) == WC_ERR_INVALID);

  wc_run_output* out = nullptr;
  CHECK(wc_run("nope", "{}", 1, &out) == WC_ERR_INVALID);
  CHECK(out == nullptr);
}

TEST_CASE("sampling, spectral and oracle through the C API") {
  wc_profile* p = nullptr;
  REQUIRE(wc_profile_random_uniform(6, 8, 0.0, 1.0, 3, 0, &p) == WC_OK);
  wc_model* g = nullptr;
  REQUIRE(wc_model_gaussian(&g) == WC_OK);
  std::vector<double> z(48), z2(48), a(36);
  REQUIRE(wc_sample(p, g, 5, 0, z.data(), z.size()) == WC_OK);
  REQUIRE(wc_sample(p, g, 5, 0, z2.data(), z2.size()) == WC_OK);
  CHECK(z == z2);
  CHECK(wc_sample(p, g, 5, 0, z.data(), 10) == WC_ERR_INVALID);
  REQUIRE(wc_centered_gram(z.data(), p, g, a.data(), a.size()) == WC_OK);
  double norm = 0.0, tr = 0.0;
  REQUIRE(wc_spectral_norm(a.data(), 6, 1e-8, &norm) == WC_OK);
  REQUIRE(wc_trace_power(a.data(), 6, 2, &tr) == WC_OK);
  CHECK(norm * norm <= tr * (1 + 1e-12));
  CHECK(tr <= 6 * norm * norm * (1 + 1e-12));

  double kappa = 0.0;
  int defined = 0;
  REQUIRE(wc_model_kappa(g, &kappa, &defined) == WC_OK);
  CHECK(defined == 1);
  CHECK(kappa == doctest::Approx(std::sqrt(2.0 / M_PI)));

  wc_estimate e{};
  REQUIRE(wc_estimate_concentration(p, g, 10, 1, 2, &e) == WC_OK);
  CHECK(e.n_reps == 10);
  CHECK(e.q05 <= e.q50);
  CHECK(e.q50 <= e.q95);

  wc_oracle_result r{};
  const double cmp[] = {1.0, 0.5, 0.0, 1.0};
  wc_profile* small = nullptr;
  REQUIRE(wc_profile_create(2, 2, cmp, &small) == WC_OK);
  REQUIRE(wc_check_gaussian_comparison(small, 2, &r) == WC_OK);
  CHECK(r.lhs == doctest::Approx(4.625));
  CHECK(r.holds == 1);
  CHECK(r.cycles_enumerated == 16);
  const unsigned x[5] = {2, 2, 0, 0, 0};
  REQUIRE(wc_check_paired_moment(x, &r) == WC_OK);
  CHECK(r.rhs == 3.0);

  wc_profile_free(small);
  wc_model_free(g);
  wc_profile_free(p);
}

TEST_CASE("bound reports through the C API") {
  const wc_summary s{1.0, 1.0, 1.0, 3.0, 3.0};
  wc_bound_report* r = nullptr;
  REQUIRE(wc_gaussian_upper_bound(&s, M_E - 1.0, 1.0, &r) == WC_OK);
  CHECK(wc_bound_report_value(r) == doctest::Approx(486.0889863738665).epsilon(1e-13));
  char* json = nullptr;
  REQUIRE(wc_bound_report_to_json(r, &json) == WC_OK);
  CHECK(take(json).find("\"bound_id\":\"gaussian\"") != std::string::npos);
  wc_bound_report_free(r);
  CHECK(wc_gaussian_upper_bound(&s, -1.0, 1.0, &r) == WC_ERR_INVALID);

  wc_clustering_result c{};
  CHECK(wc_clustering_rates(0.0, 10, 1, 1, &c) == WC_ERR_INVALID);
  REQUIRE(wc_clustering_rates(2.0, 16, 1, 4, &c) == WC_OK);
  CHECK(c.snr_threshold == doctest::Approx(2.0));

  const int l[] = {1, -1, 1, 1}, h[] = {-1, 1, 1, 1};
  double m = 0.0;
  REQUIRE(wc_misclassification(l, h, 4, &m) == WC_OK);
  CHECK(m == 0.5);
}

TEST_CASE("config-driven runs through the C API") {
  wc_run_output* out = nullptr;
  REQUIRE(wc_run("bound", R"({"id":"gaussian","profile":{"kind":"explicit","sigma":[[1,1],[1,1]]},"eps1":0.1,"eps2":0.1})",
                 1, &out) == WC_OK);
  CHECK(std::string(wc_run_output_summary(out)).find("\"bound_id\"") != std::string::npos);
  CHECK(std::string(wc_run_output_csv(out)).empty());
  wc_run_output_free(out);
  out = nullptr;
  CHECK(wc_run("simulate", R"({"profile":{"kind":"explicit","sigma":[[1]]},"reps":3})", 1, &out) == WC_ERR_INVALID);
  CHECK(std::string(wc_last_error()).find("seed") != std::string::npos);
}
