// SPDX-License-Identifier: Apache-2.0
#include "wishart/wishart.h"

#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "wishart/bounds.hpp"
#include "wishart/error.hpp"
#include "wishart/experiments.hpp"
#include "wishart/moment_oracle.hpp"
#include "wishart/profiles.hpp"
#include "wishart/runs.hpp"
#include "wishart/samplers.hpp"
#include "wishart/spectral.hpp"

struct wc_profile {
  wishart::VarianceProfile value;
};

struct wc_model {
  wishart::NoiseModel value;
};

struct wc_bound_report {
  wishart::BoundReport value;
};

struct wc_run_output {
  std::string summary;
  std::string csv;
};

namespace {

thread_local std::string last_error;

wc_status fail(wc_status status, const char* message) {
  last_error = message;
  return status;
}

template <class F>
wc_status guarded(F&& f) {
  try {
    f();
    return WC_OK;
  } catch (const wishart::SizeGuardError& e) {
    return fail(WC_ERR_SIZE, e.what());
  } catch (const wishart::ValidationError& e) {
    return fail(WC_ERR_INVALID, e.what());
  } catch (const wishart::NumericalError& e) {
    return fail(WC_ERR_NUMERICAL, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(WC_ERR_INVALID, e.what());
  } catch (const std::bad_alloc&) {
    return fail(WC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(WC_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw wishart::ValidationError(std::string(name) + " is null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

wishart::RateInputs inputs(const wc_summary* s) {
  require(s, "summary");
  return {s->sigma_C, s->sigma_R, s->sigma_star, s->p1, s->p2};
}

void store(const wishart::OracleResult& r, wc_oracle_result* out) {
  out->lhs = r.lhs;
  out->rhs = r.rhs;
  out->holds = r.holds ? 1 : 0;
  out->cycles_enumerated = r.cycles_enumerated;
}

template <class M>
void copy_matrix(const M& m, double* out, std::size_t len) {
  require(out, "out");
  const auto needed = static_cast<std::size_t>(m.rows() * m.cols());
  if (len < needed) {
    throw wishart::ValidationError("output buffer holds " + std::to_string(len) + " values, need " +
                                   std::to_string(needed));
  }
  wishart::Matrix::Map(out, m.rows(), m.cols()) = m;
}

wishart::Matrix square_from(const double* a, std::size_t p) {
  require(a, "matrix");
  if (p == 0) throw wishart::ValidationError("matrix order must be >= 1");
  return wishart::Matrix::Map(a, static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
}

}  // namespace

extern "C" {

const char* wc_version(void) { return wishart::kLibraryVersion; }

const char* wc_last_error(void) { return last_error.c_str(); }

void wc_string_free(char* s) { std::free(s); }

wc_status wc_constants_table(char** out) {
  return guarded([&] {
    require(out, "out");
    *out = copy_string(wishart::constants_table());
  });
}

wc_status wc_profile_create(size_t p1, size_t p2, const double* sigma, wc_profile** out) {
  return guarded([&] {
    require(sigma, "sigma");
    require(out, "out");
    *out = new wc_profile{wishart::VarianceProfile(p1, p2, std::vector<double>(sigma, sigma + p1 * p2))};
  });
}

wc_status wc_profile_homoskedastic_rows(const double* sigmas, size_t p1, size_t p2, wc_profile** out) {
  return guarded([&] {
    require(sigmas, "sigmas");
    require(out, "out");
    *out = new wc_profile{wishart::homoskedastic_rows(std::span<const double>(sigmas, p1), p2)};
  });
}

wc_status wc_profile_homoskedastic_columns(const double* sigmas, size_t p2, size_t p1, wc_profile** out) {
  return guarded([&] {
    require(sigmas, "sigmas");
    require(out, "out");
    *out = new wc_profile{wishart::homoskedastic_columns(std::span<const double>(sigmas, p2), p1)};
  });
}

wc_status wc_profile_lower_bound(const char* variant, double sigma_star, double sigma_C, double sigma_R, size_t p1,
                                 size_t p2, wc_profile** out) {
  return guarded([&] {
    require(variant, "variant");
    require(out, "out");
    *out = new wc_profile{wishart::lower_bound_profile(wishart::lower_bound_kind_from_string(variant),
                                                       {sigma_star, sigma_C, sigma_R, p1, p2})};
  });
}

wc_status wc_profile_random_uniform(size_t p1, size_t p2, double low, double high, uint64_t seed, uint64_t index,
                                    wc_profile** out) {
  return guarded([&] {
    require(out, "out");
    *out = new wc_profile{wishart::random_uniform_profile(p1, p2, low, high, seed, index)};
  });
}

wc_status wc_profile_from_json(const char* json, wc_profile** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new wc_profile{wishart::profile_from_json_text(json)};
  });
}

wc_status wc_profile_to_json(const wc_profile* profile, char** out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = copy_string(wishart::profile_to_json_text(profile->value));
  });
}

wc_status wc_profile_dims(const wc_profile* profile, size_t* p1, size_t* p2) {
  return guarded([&] {
    require(profile, "profile");
    require(p1, "p1");
    require(p2, "p2");
    *p1 = profile->value.rows();
    *p2 = profile->value.cols();
  });
}

wc_status wc_profile_copy_sigma(const wc_profile* profile, double* out, size_t len) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    const auto data = profile->value.data();
    if (len < data.size()) throw wishart::ValidationError("output buffer too small");
    std::copy(data.begin(), data.end(), out);
  });
}

wc_status wc_profile_summarize(const wc_profile* profile, wc_summary* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    const auto s = wishart::summarize(profile->value);
    *out = {s.sigma_C, s.sigma_R, s.sigma_star, static_cast<double>(s.p1), static_cast<double>(s.p2)};
  });
}

void wc_profile_free(wc_profile* profile) { delete profile; }

wc_status wc_model_from_json(const char* json, wc_model** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new wc_model{wishart::noise_model_from_json(nlohmann::json::parse(json))};
  });
}

wc_status wc_model_gaussian(wc_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = new wc_model{wishart::noise::Gaussian{}};
  });
}

wc_status wc_model_kappa(const wc_model* model, double* out, int* defined) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    require(defined, "defined");
    const auto k = wishart::moment_kappa(model->value);
    *defined = k.has_value() ? 1 : 0;
    *out = k.value_or(0.0);
  });
}

void wc_model_free(wc_model* model) { delete model; }

wc_status wc_sample(const wc_profile* profile, const wc_model* model, uint64_t seed, uint64_t replicate, double* out,
                    size_t len) {
  return guarded([&] {
    require(profile, "profile");
    require(model, "model");
    copy_matrix(wishart::sample(profile->value, model->value, {seed, replicate}), out, len);
  });
}

wc_status wc_centered_gram(const double* z, const wc_profile* profile, const wc_model* model, double* out,
                           size_t len) {
  return guarded([&] {
    require(z, "z");
    require(profile, "profile");
    require(model, "model");
    const auto zm = wishart::Matrix::Map(z, static_cast<Eigen::Index>(profile->value.rows()),
                                         static_cast<Eigen::Index>(profile->value.cols()));
    copy_matrix(wishart::centered_gram(zm, profile->value, model->value), out, len);
  });
}

wc_status wc_spectral_norm(const double* a, size_t p, double tol, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = wishart::spectral_norm(square_from(a, p), tol);
  });
}

wc_status wc_trace_power(const double* a, size_t p, unsigned q, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = wishart::trace_power(square_from(a, p), q);
  });
}

wc_status wc_gaussian_upper_bound(const wc_summary* s, double eps1, double eps2, wc_bound_report** out) {
  return guarded([&] {
    require(out, "out");
    *out = new wc_bound_report{wishart::gaussian_upper_bound(inputs(s), eps1, eps2)};
  });
}

wc_status wc_baseline_bounds(const wc_summary* s, wc_bound_report** symmetrization, wc_bound_report** matrix_sum) {
  return guarded([&] {
    require(symmetrization, "symmetrization");
    require(matrix_sum, "matrix_sum");
    auto both = wishart::baseline_bounds(inputs(s));
    auto* first = new wc_bound_report{std::move(both.symmetrization)};
    try {
      *matrix_sum = new wc_bound_report{std::move(both.matrix_sum)};
    } catch (...) {
      delete first;
      throw;
    }
    *symmetrization = first;
  });
}

wc_status wc_structured_rates(const wc_profile* profile, int columns, wc_bound_report** out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = new wc_bound_report{wishart::structured_rates(
        profile->value, columns ? wishart::StructureKind::kColumns : wishart::StructureKind::kRows)};
  });
}

wc_status wc_lower_bound_rate(const wc_summary* s, wc_bound_report** out) {
  return guarded([&] {
    require(out, "out");
    *out = new wc_bound_report{wishart::lower_bound_rate(inputs(s))};
  });
}

wc_status wc_moment_and_tail(const wc_summary* s, double b, double x, double c, wc_moment_tail* out) {
  return guarded([&] {
    require(out, "out");
    const auto mt = wishart::moment_and_tail(inputs(s), b, x, c);
    *out = {mt.moment_bound, mt.tail_threshold, mt.tail_prob};
  });
}

wc_status wc_clustering_rates(double mu_norm, double n, double sigma_star, double sigma_tilde,
                              wc_clustering_result* out) {
  return guarded([&] {
    require(out, "out");
    const auto r = wishart::clustering_rates(mu_norm, n, sigma_star, sigma_tilde);
    *out = {r.upper_rate, r.snr_threshold};
  });
}

double wc_bound_report_value(const wc_bound_report* report) { return report ? report->value.value : 0.0; }

wc_status wc_bound_report_to_json(const wc_bound_report* report, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    *out = copy_string(wishart::to_json(report->value).dump());
  });
}

void wc_bound_report_free(wc_bound_report* report) { delete report; }

wc_status wc_gaussian_moment(unsigned alpha, unsigned beta, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = wishart::gaussian_moment(alpha, beta);
  });
}

wc_status wc_heavy_tail_moment(unsigned alpha, unsigned beta, double b, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = wishart::heavy_tail_moment(alpha, beta, b);
  });
}

wc_status wc_exact_trace_moment(const wc_profile* profile, unsigned q, double* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = wishart::exact_trace_moment(profile->value, q);
  });
}

wc_status wc_exact_deleted_diagonal_trace_moment(const wc_profile* profile, unsigned q, double* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = wishart::exact_deleted_diagonal_trace_moment(profile->value, q);
  });
}

wc_status wc_check_gaussian_comparison(const wc_profile* profile, unsigned q, wc_oracle_result* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    store(wishart::check_gaussian_comparison(profile->value, q), out);
  });
}

wc_status wc_check_variance_contraction(const wc_profile* profile, unsigned q, wc_oracle_result* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    store(wishart::check_variance_contraction(profile->value, q), out);
  });
}

wc_status wc_check_diagonal_deletion(const wc_profile* profile, unsigned q, wc_oracle_result* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    store(wishart::check_diagonal_deletion(profile->value, q), out);
  });
}

wc_status wc_check_paired_moment(const unsigned x[5], wc_oracle_result* out) {
  return guarded([&] {
    require(x, "x");
    require(out, "out");
    store(wishart::check_paired_moment({x[0], x[1], x[2], x[3], x[4]}), out);
  });
}

wc_status wc_estimate_concentration(const wc_profile* profile, const wc_model* model, size_t n_reps, uint64_t seed,
                                    unsigned threads, wc_estimate* out) {
  return guarded([&] {
    require(profile, "profile");
    require(model, "model");
    require(out, "out");
    if (threads == 0) throw wishart::ValidationError("thread count must be >= 1");
    const auto est = wishart::estimate_concentration(profile->value, model->value, n_reps, seed, {threads});
    out->mean = est.mean;
    out->std_err = est.std_err;
    out->n_reps = est.n_reps;
    double* slots[] = {&out->q05, &out->q25, &out->q50, &out->q75, &out->q95};
    for (std::size_t i = 0; i < 5; ++i) *slots[i] = est.quantiles.at(i).second;
  });
}

wc_status wc_misclassification(const int* l, const int* l_hat, size_t n, double* out) {
  return guarded([&] {
    require(l, "l");
    require(l_hat, "l_hat");
    require(out, "out");
    *out = wishart::misclassification(std::span<const int>(l, n), std::span<const int>(l_hat, n));
  });
}

wc_status wc_run(const char* subcommand, const char* config_json, unsigned threads, wc_run_output** out) {
  return guarded([&] {
    require(subcommand, "subcommand");
    require(config_json, "config_json");
    require(out, "out");
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw wishart::ValidationError(std::string("config does not parse: ") + e.what());
    }
    const auto result = wishart::run_subcommand(subcommand, config, threads);
    *out = new wc_run_output{result.summary.dump(2), result.csv};
  });
}

const char* wc_run_output_summary(const wc_run_output* output) { return output ? output->summary.c_str() : ""; }

const char* wc_run_output_csv(const wc_run_output* output) { return output ? output->csv.c_str() : ""; }

void wc_run_output_free(wc_run_output* output) { delete output; }

}  // extern "C"
