// SPDX-License-Identifier: Apache-2.0
#include "wishart/runs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <cstdio>
#include <sstream>

#include "wishart/bounds.hpp"
#include "wishart/error.hpp"
#include "wishart/experiments.hpp"
#include "wishart/moment_oracle.hpp"
#include "wishart/profiles.hpp"
#include "wishart/samplers.hpp"

namespace wishart {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

double get_double(const json& obj, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(std::string("missing key '") + key + "'");
  }
  if (!obj.at(key).is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  return obj.at(key).get<double>();
}

std::uint64_t get_uint(const json& obj, const char* key, std::optional<std::uint64_t> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(std::string("missing key '") + key + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ValidationError(std::string("'") + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const char* key, std::optional<std::string> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(std::string("missing key '") + key + "'");
  }
  if (!obj.at(key).is_string()) throw ValidationError(std::string("'") + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> get_doubles(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_array()) {
    throw ValidationError(std::string("'") + key + "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const json& v : obj.at(key)) {
    if (!v.is_number()) throw ValidationError(std::string("'") + key + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::uint64_t require_seed(const json& config) {
  if (!config.contains("seed")) throw ValidationError("a seed is required (pass --seed)");
  return get_uint(config, "seed");
}

json summary_json(const ProfileSummary& s) {
  return {{"sigma_C", s.sigma_C}, {"sigma_R", s.sigma_R}, {"sigma_star", s.sigma_star}, {"p1", s.p1},
          {"p2", s.p2}, {"p_min", s.p_min()}};
}

json estimate_json(const ConcentrationEstimate& e) {
  json q = json::object();
  for (const auto& [p, v] : e.quantiles) q[format_double(p)] = v;
  return {{"mean", e.mean}, {"std_err", e.std_err}, {"n_reps", e.n_reps}, {"quantiles", std::move(q)}};
}

RateInputs rate_inputs_from_config(const json& config) {
  const bool has_profile = config.contains("profile");
  const bool has_summary = config.contains("summary");
  if (has_profile == has_summary) throw ValidationError("give exactly one of 'profile' or 'summary'");
  if (has_profile) return rate_inputs(summarize(profile_from_json(config.at("profile"))));
  const json& s = config.at("summary");
  expect_keys(s, {"sigma_C", "sigma_R", "sigma_star", "p1", "p2"}, "summary");
  return {get_double(s, "sigma_C"), get_double(s, "sigma_R"), get_double(s, "sigma_star"), get_double(s, "p1"),
          get_double(s, "p2")};
}

unsigned get_q(const json& config) {
  const std::uint64_t q = get_uint(config, "q");
  if (q < 1 || q > 64) throw ValidationError("'q' must lie in [1, 64]");
  return static_cast<unsigned>(q);
}

}  // namespace

RunOutput run_profile(const json& config) {
  expect_keys(config, {"profile"}, "profile config");
  if (!config.contains("profile")) throw ValidationError("missing key 'profile'");
  const VarianceProfile profile = profile_from_json(config.at("profile"));
  RunOutput out;
  out.summary = {{"profile", profile_to_json(profile)}, {"summary", summary_json(summarize(profile))},
                 {"config", config}};
  return out;
}

RunOutput run_bound(const json& config) {
  if (!config.is_object()) throw ValidationError("bound config must be a JSON object");
  const BoundId id = bound_id_from_string(get_string(config, "id"));
  json resolved = config;
  BoundReport report;
  switch (id) {
    case BoundId::kGaussianUpper: {
      expect_keys(config, {"id", "profile", "summary", "eps1", "eps2"}, "gaussian bound config");
      const double e1 = get_double(config, "eps1", 0.1), e2 = get_double(config, "eps2", 0.1);
      resolved["eps1"] = e1;
      resolved["eps2"] = e2;
      report = gaussian_upper_bound(rate_inputs_from_config(config), e1, e2);
      break;
    }
    case BoundId::kSymmetrization:
    case BoundId::kMatrixSum: {
      expect_keys(config, {"id", "profile", "summary"}, "baseline bound config");
      const auto both = baseline_bounds(rate_inputs_from_config(config));
      report = id == BoundId::kSymmetrization ? both.symmetrization : both.matrix_sum;
      break;
    }
    case BoundId::kUnified: {
      expect_keys(config, {"id", "profile", "summary", "family", "alpha", "B", "kappa", "C", "C0", "eps"},
                  "unified bound config");
      UnifiedParams p;
      p.family = unified_family_from_string(get_string(config, "family"));
      if (config.contains("alpha")) p.alpha = get_double(config, "alpha");
      if (config.contains("B")) p.bound = get_double(config, "B");
      if (config.contains("kappa")) p.kappa = get_double(config, "kappa");
      p.c = get_double(config, "C", 1.0);
      p.c0 = get_double(config, "C0", 1.0);
      p.eps = get_double(config, "eps", 0.0);
      resolved["C"] = p.c;
      resolved["C0"] = p.c0;
      resolved["eps"] = p.eps;
      report = unified_bound(rate_inputs_from_config(config), p);
      break;
    }
    case BoundId::kMomentTail: {
      expect_keys(config, {"id", "profile", "summary", "b", "x", "C"}, "moment_tail bound config");
      const double b = get_double(config, "b", 1.0), x = get_double(config, "x", 0.0), c = get_double(config, "C", 1.0);
      resolved["b"] = b;
      resolved["x"] = x;
      resolved["C"] = c;
      report = to_report(moment_and_tail(rate_inputs_from_config(config), b, x, c), b, x, c);
      break;
    }
    case BoundId::kStructuredRows:
    case BoundId::kStructuredColumns: {
      expect_keys(config, {"id", "profile"}, "structured bound config");
      if (!config.contains("profile")) throw ValidationError("structured rates need 'profile'");
      report = structured_rates(profile_from_json(config.at("profile")),
                                id == BoundId::kStructuredRows ? StructureKind::kRows : StructureKind::kColumns);
      break;
    }
    case BoundId::kLowerBound: {
      expect_keys(config, {"id", "profile", "summary"}, "lower_bound config");
      report = lower_bound_rate(rate_inputs_from_config(config));
      break;
    }
    case BoundId::kClustering: {
      expect_keys(config, {"id", "mu_norm", "n", "sigmas", "sigma_star", "sigma_tilde"}, "clustering bound config");
      const double n = get_double(config, "n");
      double s_star = 0.0, s_tilde = 0.0;
      if (config.contains("sigmas")) {
        if (config.contains("sigma_star") || config.contains("sigma_tilde")) {
          throw ValidationError("give either 'sigmas' or 'sigma_star' and 'sigma_tilde'");
        }
        const auto sig = get_doubles(config, "sigmas");
        s_star = sig.empty() ? 0.0 : *std::max_element(sig.begin(), sig.end());
        s_tilde = sigma_tilde(sig);
      } else {
        s_star = get_double(config, "sigma_star");
        s_tilde = get_double(config, "sigma_tilde");
      }
      report.bound_id = BoundId::kClustering;
      report.rate_only = true;
      const double mu = get_double(config, "mu_norm", 0.0);
      const double threshold = snr_threshold(n, s_star, s_tilde);
      report.terms = {{"snr_threshold", threshold}};
      if (config.contains("mu_norm")) {
        const ClusteringRates rates = clustering_rates(mu, n, s_star, s_tilde);
        report.value = rates.upper_rate;
        report.terms.push_back({"upper_rate", rates.upper_rate});
      } else {
        report.value = threshold;
      }
      report.params = {{"n", n}, {"sigma_star", s_star}, {"sigma_tilde", s_tilde}};
      if (config.contains("mu_norm")) report.params.push_back({"mu_norm", mu});
      break;
    }
  }
  RunOutput out;
  out.summary = to_json(report);
  out.summary["config"] = resolved;
  return out;
}

RunOutput run_simulate(const json& config, unsigned threads) {
  expect_keys(config, {"profile", "model", "reps", "seed", "tol", "quantiles", "tail"}, "simulate config");
  if (!config.contains("profile")) throw ValidationError("missing key 'profile'");
  const VarianceProfile profile = profile_from_json(config.at("profile"));
  const json model_spec = config.value("model", json{{"model", "gaussian"}, {"params", json::object()}});
  const NoiseModel model = noise_model_from_json(model_spec);
  const std::uint64_t reps = get_uint(config, "reps");
  const std::uint64_t seed = require_seed(config);
  const double tol = get_double(config, "tol", kDefaultSpectralTol);
  const std::vector<double> probs = config.contains("quantiles") ? get_doubles(config, "quantiles") : kDefaultQuantiles;
  if (reps < 2) throw ValidationError("'reps' must be >= 2");

  std::vector<double> x_grid;
  double tail_c = 1.0;
  if (config.contains("tail")) {
    const json& t = config.at("tail");
    expect_keys(t, {"x", "C"}, "tail config");
    x_grid = get_doubles(t, "x");
    tail_c = get_double(t, "C");
    if (!(tail_c > 0.0)) throw ValidationError("tail 'C' must be > 0");
    for (double x : x_grid)
      if (!(x >= 0.0)) throw ValidationError("tail 'x' values must be >= 0");
  }
  if (!(tol > 0.0) || tol > 1e-2) throw ValidationError("'tol' must lie in (0, 1e-2]");

  const RunOptions options{threads, tol};
  const auto norms = replicate_norms(profile, model, reps, seed, options);
  const ConcentrationEstimate est = summarize_replicates(norms, probs);
  const ProfileSummary s = summarize(effective_profile(profile, model));

  json resolved = {{"profile", config.at("profile")}, {"model", noise_model_to_json(model)}, {"reps", reps},
                   {"seed", seed}, {"tol", tol}, {"quantiles", probs}};
  RunOutput out;
  out.summary = {{"estimate", estimate_json(est)}, {"summary", summary_json(s)}, {"guards_passed", true}};
  std::ostringstream csv;
  csv << "p1,p2,model,sigma_C,sigma_R,sigma_star,n_reps,mean,std_err\n"
      << s.p1 << ',' << s.p2 << ',' << to_string(kind_of(model)) << ',' << format_double(s.sigma_C) << ','
      << format_double(s.sigma_R) << ',' << format_double(s.sigma_star) << ',' << est.n_reps << ','
      << format_double(est.mean) << ',' << format_double(est.std_err) << '\n';
  if (config.contains("tail")) {
    resolved["tail"] = {{"x", x_grid}, {"C", tail_c}};
    json tail = json::array();
    for (const TailPoint& pt : tail_frequencies(s, norms, x_grid, tail_c)) {
      tail.push_back({{"x", pt.x}, {"threshold", pt.threshold}, {"exceedances", pt.exceedances},
                      {"frequency", pt.frequency}, {"tail_prob", pt.tail_prob}, {"binomial_se", pt.binomial_se}});
    }
    out.summary["tail"] = std::move(tail);
  }
  out.summary["config"] = std::move(resolved);
  out.csv = csv.str();
  return out;
}

RunOutput run_oracle(const json& config) {
  if (!config.is_object()) throw ValidationError("oracle config must be a JSON object");
  const std::string check = get_string(config, "check");
  OracleResult r;
  json resolved = config;
  if (check == "paired") {
    expect_keys(config, {"check", "x"}, "paired oracle config");
    const auto xs = get_doubles(config, "x");
    if (xs.size() != 5) throw ValidationError("'x' must hold five nonnegative integers");
    std::array<unsigned, 5> x{};
    for (std::size_t i = 0; i < 5; ++i) {
      if (!(xs[i] >= 0.0) || xs[i] != std::floor(xs[i]) || xs[i] > 64) {
        throw ValidationError("'x' must hold five nonnegative integers");
      }
      x[i] = static_cast<unsigned>(xs[i]);
    }
    r = check_paired_moment(x);
  } else {
    expect_keys(config, {"check", "profile", "q"}, "oracle config");
    if (!config.contains("profile")) throw ValidationError("missing key 'profile'");
    const VarianceProfile profile = profile_from_json(config.at("profile"));
    const unsigned q = get_q(config);
    if (check == "comparison") {
      r = check_gaussian_comparison(profile, q);
    } else if (check == "contraction") {
      r = check_variance_contraction(profile, q);
    } else if (check == "deletion") {
      r = check_diagonal_deletion(profile, q);
    } else {
      throw ValidationError("unknown oracle check '" + check +
                            "' (expected comparison, contraction, deletion or paired)");
    }
  }
  RunOutput out;
  out.summary = {{"lhs", r.lhs},
                 {"rhs", r.rhs},
                 {"holds", r.holds},
                 {"cycles_enumerated", r.cycles_enumerated},
                 {"config", resolved}};
  return out;
}

RunOutput run_sweep(const json& config, unsigned threads) {
  expect_keys(config, {"family", "grid", "sigma_range", "model", "reps", "seed", "bound", "eps1", "eps2", "tol"},
              "sweep config");
  SweepSpec spec;
  spec.family = sweep_family_from_string(get_string(config, "family"));
  spec.seed = require_seed(config);
  spec.n_reps = get_uint(config, "reps");
  spec.model = noise_model_from_json(config.value("model", json{{"model", "gaussian"}, {"params", json::object()}}));
  spec.bound_id = bound_id_from_string(get_string(config, "bound", "gaussian"));
  spec.eps1 = get_double(config, "eps1", 0.1);
  spec.eps2 = get_double(config, "eps2", 0.1);
  const double tol = get_double(config, "tol", kDefaultSpectralTol);
  if (!(tol > 0.0) || tol > 1e-2) throw ValidationError("'tol' must lie in (0, 1e-2]");
  if (config.contains("sigma_range")) {
    const auto range = get_doubles(config, "sigma_range");
    if (range.size() != 2) throw ValidationError("'sigma_range' must be [low, high]");
    spec.sigma_low = range[0];
    spec.sigma_high = range[1];
  }
  if (!config.contains("grid")) throw ValidationError("missing key 'grid'");
  const json& grid = config.at("grid");
  if (grid.is_array()) {
    for (const json& pt : grid) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number_unsigned() || !pt[1].is_number_unsigned() ||
          pt[0].get<std::size_t>() < 1 || pt[1].get<std::size_t>() < 1) {
        throw ValidationError("'grid' entries must be [p1, p2] with positive integers");
      }
      spec.grid.push_back({pt[0].get<std::size_t>(), pt[1].get<std::size_t>()});
    }
  } else if (grid.is_object()) {
    expect_keys(grid, {"random"}, "grid");
    const json& r = grid.contains("random") ? grid.at("random") : throw ValidationError("grid object needs 'random'");
    expect_keys(r, {"count", "p_min", "p_max"}, "random grid");
    spec.grid = random_grid(get_uint(r, "count"), get_uint(r, "p_min"), get_uint(r, "p_max"), spec.seed);
  } else {
    throw ValidationError("'grid' must be an array of [p1, p2] or {\"random\": {...}}");
  }

  const auto rows = rate_sweep(spec, RunOptions{threads, tol});
  double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = -min_ratio;
  for (const auto& row : rows) {
    if (std::isnan(row.ratio)) continue;
    min_ratio = std::min(min_ratio, row.ratio);
    max_ratio = std::max(max_ratio, row.ratio);
  }
  json resolved = {{"family", std::string(to_string(spec.family))},
                   {"grid", grid},
                   {"sigma_range", {spec.sigma_low, spec.sigma_high}},
                   {"model", noise_model_to_json(spec.model)},
                   {"reps", spec.n_reps},
                   {"seed", spec.seed},
                   {"bound", std::string(to_string(spec.bound_id))},
                   {"eps1", spec.eps1},
                   {"eps2", spec.eps2},
                   {"tol", tol}};
  RunOutput out;
  out.csv = sweep_csv(spec, rows);
  out.summary = {{"rows", rows.size()}, {"guards_passed", true}, {"config", std::move(resolved)}};
  if (min_ratio <= max_ratio) {
    out.summary["min_ratio"] = min_ratio;
    out.summary["max_ratio"] = max_ratio;
  }
  return out;
}

RunOutput run_cluster(const json& config, unsigned threads) {
  expect_keys(config, {"n", "p", "sigmas", "lambdas", "lambda_unit", "direction", "reps", "seed"}, "cluster config");
  const std::size_t n = get_uint(config, "n");
  const std::size_t p = get_uint(config, "p");
  const std::uint64_t reps = get_uint(config, "reps");
  const std::uint64_t seed = require_seed(config);
  if (n < 2 || p < 1) throw ValidationError("cluster needs n >= 2 and p >= 1");
  std::vector<double> sigmas;
  if (!config.contains("sigmas")) throw ValidationError("missing key 'sigmas'");
  if (config.at("sigmas").is_number()) {
    sigmas.assign(p, config.at("sigmas").get<double>());
  } else {
    sigmas = get_doubles(config, "sigmas");
  }
  if (sigmas.size() != p) throw ValidationError("'sigmas' must be a number or an array of length p");
  for (double s : sigmas)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("'sigmas' must be finite and nonnegative");
  const std::string unit = get_string(config, "lambda_unit", "absolute");
  if (unit != "absolute" && unit != "threshold") {
    throw ValidationError("'lambda_unit' must be 'absolute' or 'threshold'");
  }
  std::vector<double> lambdas = get_doubles(config, "lambdas");
  std::optional<Vector> direction;
  if (config.contains("direction")) {
    const auto d = get_doubles(config, "direction");
    direction = Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
  }
  const double s_star = sigmas.empty() ? 0.0 : *std::max_element(sigmas.begin(), sigmas.end());
  const double threshold = snr_threshold(static_cast<double>(n), s_star, sigma_tilde(sigmas));
  std::vector<double> absolute = lambdas;
  if (unit == "threshold") {
    for (double& l : absolute) l *= threshold;
  }
  const PhaseDiagram diagram = phase_diagram(n, p, sigmas, absolute, reps, seed, RunOptions{threads}, direction);

  json resolved = {{"n", n},     {"p", p},         {"sigmas", config.at("sigmas")}, {"lambdas", lambdas},
                   {"lambda_unit", unit}, {"reps", reps}, {"seed", seed}};
  if (config.contains("direction")) resolved["direction"] = config.at("direction");
  json points = json::array();
  for (const auto& pt : diagram.points) {
    json j = {{"lambda", pt.lambda},
              {"lambda_over_threshold", pt.lambda_over_threshold},
              {"mean_misclassification", pt.mean_misclassification},
              {"std_err", pt.std_err}};
    if (pt.upper_rate) j["upper_rate"] = *pt.upper_rate;
    points.push_back(std::move(j));
  }
  RunOutput out;
  out.csv = phase_diagram_csv(diagram);
  out.summary = {{"snr_threshold", diagram.snr_threshold},
                 {"sigma_star", diagram.sigma_star},
                 {"sigma_tilde", diagram.sigma_tilde},
                 {"points", std::move(points)},
                 {"guards_passed", true},
                 {"config", std::move(resolved)}};
  return out;
}

RunOutput run_subcommand(std::string_view name, const json& config, unsigned threads) {
  if (threads == 0) throw ValidationError("thread count must be >= 1");
  if (name == "profile") return run_profile(config);
  if (name == "bound") return run_bound(config);
  if (name == "simulate") return run_simulate(config, threads);
  if (name == "oracle") return run_oracle(config);
  if (name == "sweep") return run_sweep(config, threads);
  if (name == "cluster") return run_cluster(config, threads);
  throw ValidationError("unknown subcommand '" + std::string(name) + "'");
}

std::string constants_table() {
  std::ostringstream out;
  out << "formula constants\n"
      << "  C1(eps1)       = 10 (1 + eps1) sqrt(ceil(1 / log(1 + eps1)))\n"
      << "  C2(eps1, eps2) = (1 + eps1) ceil(1 / log(1 + eps1)) (25 / eps2 + 24)\n"
      << "  envelope C     = " << format_double(kEnvelopeConstant) << "  (sub-Gaussian moment envelope (C kappa)^(a+2b))\n"
      << "  rate-only bounds use constant 1 unless a C/C0 knob is given\n"
      << "sample values\n";
  for (double eps1 : {0.1, std::exp(1.0) - 1.0, 3.0}) {
    char line[160];
    std::snprintf(line, sizeof line, "  eps1 = %-10.6g C1 = %-12.8g C2(eps2 = 0.1) = %-12.8g C2(eps2 = 1) = %.8g\n",
                  eps1, gaussian_c1(eps1), gaussian_c2(eps1, 0.1), gaussian_c2(eps1, 1.0));
    out << line;
  }
  return out.str();
}

}  // namespace wishart
