// SPDX-License-Identifier: Apache-2.0
#include "wishart/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "wishart/error.hpp"

namespace wishart {

namespace {

constexpr double kAdmissibleSlack = 1e-12;

void check_inputs(const RateInputs& s) {
  for (double v : {s.sigma_C, s.sigma_R, s.sigma_star}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("variance scales must be finite and nonnegative");
  }
  if (!(s.p1 >= 1.0) || !(s.p2 >= 1.0) || !std::isfinite(s.p1) || !std::isfinite(s.p2)) {
    throw ValidationError("dimensions must be finite and >= 1");
  }
}

double log_min(const RateInputs& s) { return std::log(std::min(s.p1, s.p2)); }
double log_max(const RateInputs& s) { return std::log(std::max(s.p1, s.p2)); }

double positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite and > 0");
  return v;
}

double sum_of(const NamedValues& terms) {
  double total = 0.0;
  for (const auto& [_, v] : terms) total += v;
  return total;
}

NamedValues scale_params(const RateInputs& s) {
  return {{"sigma_C", s.sigma_C}, {"sigma_R", s.sigma_R}, {"sigma_star", s.sigma_star}, {"p1", s.p1}, {"p2", s.p2}};
}

}  // namespace

RateInputs rate_inputs(const ProfileSummary& summary) {
  return {summary.sigma_C, summary.sigma_R, summary.sigma_star, static_cast<double>(summary.p1),
          static_cast<double>(summary.p2)};
}

std::string_view to_string(BoundId id) {
  switch (id) {
    case BoundId::kGaussianUpper: return "gaussian";
    case BoundId::kSymmetrization: return "symmetrization";
    case BoundId::kMatrixSum: return "matrix_sum";
    case BoundId::kUnified: return "unified";
    case BoundId::kMomentTail: return "moment_tail";
    case BoundId::kStructuredRows: return "structured_rows";
    case BoundId::kStructuredColumns: return "structured_columns";
    case BoundId::kLowerBound: return "lower_bound";
    case BoundId::kClustering: return "clustering";
  }
  return "unknown";
}

BoundId bound_id_from_string(std::string_view name) {
  for (BoundId id : {BoundId::kGaussianUpper, BoundId::kSymmetrization, BoundId::kMatrixSum, BoundId::kUnified,
                     BoundId::kMomentTail, BoundId::kStructuredRows, BoundId::kStructuredColumns,
                     BoundId::kLowerBound, BoundId::kClustering}) {
    if (name == to_string(id)) return id;
  }
  throw ValidationError("unknown bound id '" + std::string(name) + "'");
}

nlohmann::json to_json(const BoundReport& report) {
  nlohmann::json terms = nlohmann::json::object();
  for (const auto& [k, v] : report.terms) terms[k] = v;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : report.params) params[k] = v;
  return {{"bound_id", std::string(to_string(report.bound_id))},
          {"value", report.value},
          {"terms", std::move(terms)},
          {"params", std::move(params)},
          {"rate_only", report.rate_only}};
}

double ceil_inverse_log(double eps1) {
  positive(eps1, "eps1");
  const double x = 1.0 / std::log1p(eps1);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-12 * std::max(1.0, nearest)) return nearest;
  return std::ceil(x);
}

double gaussian_c1(double eps1) { return 10.0 * (1.0 + eps1) * std::sqrt(ceil_inverse_log(eps1)); }

double gaussian_c2(double eps1, double eps2) {
  positive(eps2, "eps2");
  return (1.0 + eps1) * ceil_inverse_log(eps1) * (25.0 / eps2 + 24.0);
}

BoundReport gaussian_upper_bound(const RateInputs& s, double eps1, double eps2) {
  check_inputs(s);
  positive(eps1, "eps1");
  positive(eps2, "eps2");
  const double c1 = gaussian_c1(eps1);
  const double c2 = gaussian_c2(eps1, eps2);
  const double l = log_min(s);
  BoundReport r;
  r.bound_id = BoundId::kGaussianUpper;
  r.terms = {{"cross", 2.0 * s.sigma_C * s.sigma_R},
             {"column", (1.0 + eps2) * s.sigma_C * s.sigma_C},
             {"mixed_log", c1 * s.sigma_R * s.sigma_star * std::sqrt(l)},
             {"entry_log", c2 * s.sigma_star * s.sigma_star * l}};
  r.value = (1.0 + eps1) * sum_of(r.terms);
  r.params = {{"eps1", eps1}, {"eps2", eps2}, {"C1", c1}, {"C2", c2}, {"prefactor", 1.0 + eps1}};
  for (auto& p : scale_params(s)) r.params.push_back(p);
  return r;
}

BaselineReports baseline_bounds(const RateInputs& s) {
  check_inputs(s);
  BaselineReports out;
  const double root = s.sigma_C + s.sigma_R + s.sigma_star * std::sqrt(log_min(s));
  out.symmetrization.bound_id = BoundId::kSymmetrization;
  out.symmetrization.terms = {{"square", root * root}};
  out.symmetrization.value = root * root;
  out.symmetrization.params = {{"constant", 1.0}};
  out.symmetrization.rate_only = true;

  const double l2 = std::log(s.p2);
  out.matrix_sum.bound_id = BoundId::kMatrixSum;
  out.matrix_sum.terms = {{"cross", s.sigma_C * s.sigma_R * std::sqrt(l2)},
                          {"column", s.sigma_C * s.sigma_C * l2 * l2}};
  out.matrix_sum.value = sum_of(out.matrix_sum.terms);
  out.matrix_sum.params = {{"constant", 1.0}};
  out.matrix_sum.rate_only = true;
  for (auto* r : {&out.symmetrization, &out.matrix_sum})
    for (auto& p : scale_params(s)) r->params.push_back(p);
  return out;
}

std::string_view to_string(UnifiedFamily family) {
  switch (family) {
    case UnifiedFamily::kSubGaussian: return "subgaussian";
    case UnifiedFamily::kHeavyTail: return "heavy_tail";
    case UnifiedFamily::kBounded: return "bounded";
    case UnifiedFamily::kGaussian: return "gaussian";
  }
  return "unknown";
}

UnifiedFamily unified_family_from_string(std::string_view name) {
  for (UnifiedFamily f :
       {UnifiedFamily::kSubGaussian, UnifiedFamily::kHeavyTail, UnifiedFamily::kBounded, UnifiedFamily::kGaussian}) {
    if (name == to_string(f)) return f;
  }
  throw ValidationError("unknown unified family '" + std::string(name) + "'");
}

BoundReport unified_bound(const RateInputs& s, const UnifiedParams& params) {
  check_inputs(s);
  positive(params.c, "C");
  const double root_log = std::sqrt(log_min(s));
  double k = 0.0;
  double c0 = params.c0;
  BoundReport r;
  r.bound_id = BoundId::kUnified;
  r.rate_only = true;
  r.params = {{"C", params.c}};
  switch (params.family) {
    case UnifiedFamily::kSubGaussian:
      positive(c0, "C0");
      k = params.c * s.sigma_star * root_log;
      break;
    case UnifiedFamily::kHeavyTail: {
      if (!params.alpha) throw ValidationError("heavy_tail unified bound needs alpha");
      const double alpha = *params.alpha;
      if (!(alpha > 0.0) || alpha > 2.0) throw ValidationError("alpha must lie in (0, 2]");
      positive(c0, "C0");
      k = params.c * s.sigma_star * root_log * std::pow(log_max(s), 1.0 / alpha - 0.5);
      r.params.push_back({"alpha", alpha});
      break;
    }
    case UnifiedFamily::kBounded:
      if (!params.bound) throw ValidationError("bounded unified bound needs B");
      positive(*params.bound, "B");
      if (!(params.eps >= 0.0)) throw ValidationError("eps must be >= 0");
      c0 = 1.0 + params.eps;
      k = params.c * *params.bound * root_log;
      r.params.push_back({"B", *params.bound});
      r.params.push_back({"eps", params.eps});
      break;
    case UnifiedFamily::kGaussian:
      if (!(params.eps >= 0.0)) throw ValidationError("eps must be >= 0");
      c0 = 1.0 + params.eps;
      k = params.c * s.sigma_star * root_log;
      r.params.push_back({"eps", params.eps});
      break;
  }
  if (params.kappa) r.params.push_back({"kappa", *params.kappa});
  const double root = s.sigma_C + s.sigma_R + k;
  r.terms = {{"square", root * root}, {"subtracted", -s.sigma_R * s.sigma_R}};
  r.value = c0 * std::max(0.0, sum_of(r.terms));
  r.params.push_back({"C0", c0});
  r.params.push_back({"K", k});
  for (auto& p : scale_params(s)) r.params.push_back(p);
  return r;
}

MomentTail moment_and_tail(const RateInputs& s, double b, double x, double c) {
  check_inputs(s);
  positive(b, "b");
  positive(c, "C");
  if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("x must be finite and >= 0");
  const double l = log_min(s);
  const double sc2 = s.sigma_C * s.sigma_C;
  const double m = s.sigma_C + s.sigma_R + s.sigma_star * std::sqrt(std::max(b, l));
  const double t = s.sigma_C + s.sigma_R + s.sigma_star * std::sqrt(l) + x;
  return {m * m - sc2, c * (t * t - sc2), std::exp(-x * x)};
}

BoundReport to_report(const MomentTail& mt, double b, double x, double c) {
  BoundReport r;
  r.bound_id = BoundId::kMomentTail;
  r.value = mt.moment_bound;
  r.terms = {{"moment_bound", mt.moment_bound}, {"tail_threshold", mt.tail_threshold}, {"tail_prob", mt.tail_prob}};
  r.params = {{"b", b}, {"x", x}, {"C", c}};
  r.rate_only = true;
  return r;
}

double structured_rows_rate(std::span<const double> sigmas, std::size_t p2) {
  if (sigmas.empty() || p2 == 0) throw ValidationError("structured rate needs nonempty dimensions");
  double sum2 = 0.0, max_s = 0.0;
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw ValidationError("scales must be nonnegative");
    sum2 += s * s;
    max_s = std::max(max_s, s);
  }
  return sum2 + std::sqrt(static_cast<double>(p2) * sum2) * max_s;
}

double structured_columns_rate(std::span<const double> sigmas, std::size_t p1) {
  if (sigmas.empty() || p1 == 0) throw ValidationError("structured rate needs nonempty dimensions");
  double sum4 = 0.0, max_s = 0.0;
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw ValidationError("scales must be nonnegative");
    sum4 += s * s * s * s;
    max_s = std::max(max_s, s);
  }
  const double n = static_cast<double>(p1);
  return std::sqrt(n * sum4) + n * max_s * max_s;
}

BoundReport structured_rates(const VarianceProfile& profile, StructureKind kind) {
  BoundReport r;
  r.rate_only = true;
  std::vector<double> scales;
  if (kind == StructureKind::kRows) {
    for (std::size_t i = 0; i < profile.rows(); ++i) {
      for (std::size_t j = 1; j < profile.cols(); ++j)
        if (profile(i, j) != profile(i, 0))
          throw ValidationError("wrong structure kind: row " + std::to_string(i) + " is not homoskedastic");
      scales.push_back(profile(i, 0));
    }
    r.bound_id = BoundId::kStructuredRows;
    double sum2 = 0.0, max_s = 0.0;
    for (double s : scales) sum2 += s * s, max_s = std::max(max_s, s);
    r.terms = {{"sum_sq", sum2}, {"cross", std::sqrt(static_cast<double>(profile.cols()) * sum2) * max_s}};
  } else {
    for (std::size_t j = 0; j < profile.cols(); ++j) {
      for (std::size_t i = 1; i < profile.rows(); ++i)
        if (profile(i, j) != profile(0, j))
          throw ValidationError("wrong structure kind: column " + std::to_string(j) + " is not homoskedastic");
      scales.push_back(profile(0, j));
    }
    r.bound_id = BoundId::kStructuredColumns;
    double sum4 = 0.0, max_s = 0.0;
    for (double s : scales) sum4 += s * s * s * s, max_s = std::max(max_s, s);
    const double n = static_cast<double>(profile.rows());
    r.terms = {{"fourth", std::sqrt(n * sum4)}, {"max_sq", n * max_s * max_s}};
  }
  r.value = sum_of(r.terms);
  r.params = {{"p1", static_cast<double>(profile.rows())}, {"p2", static_cast<double>(profile.cols())}};
  return r;
}

BoundReport lower_bound_rate(const RateInputs& s) {
  check_inputs(s);
  const double hi = std::min(s.sigma_C, s.sigma_R);
  const double lo = std::max(s.sigma_C / std::sqrt(s.p1), s.sigma_R / std::sqrt(s.p2));
  const double slack = kAdmissibleSlack * std::max({s.sigma_C, s.sigma_R, s.sigma_star, 1e-300});
  if (s.sigma_star > hi + slack) {
    throw ValidationError("inadmissible: need sigma_* <= min(sigma_C, sigma_R)");
  }
  if (s.sigma_star + slack < lo) {
    throw ValidationError("inadmissible: need sigma_* >= max(sigma_C / sqrt(p1), sigma_R / sqrt(p2))");
  }
  const double l = log_min(s);
  BoundReport r;
  r.bound_id = BoundId::kLowerBound;
  r.rate_only = true;
  r.terms = {{"column", s.sigma_C * s.sigma_C},
             {"cross", s.sigma_C * s.sigma_R},
             {"mixed_log", s.sigma_R * s.sigma_star * std::sqrt(l)},
             {"entry_log", s.sigma_star * s.sigma_star * l}};
  r.value = sum_of(r.terms);
  r.params = scale_params(s);
  return r;
}

double sigma_tilde(std::span<const double> sigmas) {
  double sum4 = 0.0;
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw ValidationError("scales must be nonnegative");
    sum4 += s * s * s * s;
  }
  return std::sqrt(std::sqrt(sum4));
}

double snr_threshold(double n, double sigma_star, double sigma_tilde) {
  if (!(n >= 1.0)) throw ValidationError("n must be >= 1");
  if (!(sigma_star >= 0.0) || !(sigma_tilde >= 0.0)) throw ValidationError("scales must be nonnegative");
  return std::max(sigma_star, sigma_tilde / std::pow(n, 0.25));
}

ClusteringRates clustering_rates(double mu_norm, double n, double sigma_star, double sigma_tilde) {
  const double threshold = snr_threshold(n, sigma_star, sigma_tilde);
  if (!(mu_norm >= 0.0) || !std::isfinite(mu_norm)) throw ValidationError("|mu| must be finite and >= 0");
  if (mu_norm == 0.0) throw ValidationError("misclassification rate is undefined for mu = 0");
  const double num = n * mu_norm * sigma_star + n * sigma_star * sigma_star + std::sqrt(n) * sigma_tilde * sigma_tilde;
  return {std::min(1.0, num / (n * mu_norm * mu_norm)), threshold};
}

}  // namespace wishart
