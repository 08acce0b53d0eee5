// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Builds a JSON config from --config plus flags,
// hands it to the library through the C interface, and writes the results.
//
// Exit codes: 0 ok, 1 I/O or internal failure, 2 usage, 3 validation,
// 4 guard/size limit, 5 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wishart/wishart.h"

namespace {

using nlohmann::json;

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kInvalid = 3, kGuard = 4, kNumerical = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(wc_status status) {
  switch (status) {
    case WC_OK: return kOk;
    case WC_ERR_INVALID: return kInvalid;
    case WC_ERR_SIZE: return kGuard;
    case WC_ERR_NUMERICAL: return kNumerical;
    default: return kFailure;
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + " is not valid JSON: " + e.what());
  }
}

void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path temp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + temp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + temp.string());
  }
  fs::rename(temp, target);
}

struct Common {
  std::string config_path;
  std::string out_path;
  std::string summary_path;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> reps;
  std::string profile_path;
};

json base_config(const Common& c) {
  json config = c.config_path.empty() ? json::object() : read_json_file(c.config_path);
  if (!config.is_object()) throw UsageError("--config must hold a JSON object");
  // A summary file can be fed back in: its "config" block is the run config.
  if (config.contains("config") && config.at("config").is_object()) config = config.at("config");
  if (!c.profile_path.empty()) config["profile"] = read_json_file(c.profile_path);
  if (c.seed) config["seed"] = *c.seed;
  if (c.reps) config["reps"] = *c.reps;
  return config;
}

struct RunResult {
  json summary;
  std::string csv;
};

RunResult run(const std::string& name, const json& config, unsigned threads) {
  wc_run_output* out = nullptr;
  const wc_status status = wc_run(name.c_str(), config.dump().c_str(), threads, &out);
  if (status != WC_OK) {
    std::fprintf(stderr, "error: %s\n", wc_last_error());
    std::exit(exit_code_for(status));
  }
  RunResult r{json::parse(wc_run_output_summary(out)), wc_run_output_csv(out)};
  wc_run_output_free(out);
  return r;
}

void emit_json_result(const Common& c, const RunResult& r) {
  const std::string text = r.summary.dump(2) + "\n";
  std::cout << text;
  if (!c.out_path.empty()) write_atomically(c.out_path, text);
  if (!c.summary_path.empty()) write_atomically(c.summary_path, text);
}

void emit_table_result(const Common& c, const RunResult& r, const std::string& human) {
  if (!c.out_path.empty()) write_atomically(c.out_path, r.csv);
  if (!c.summary_path.empty()) write_atomically(c.summary_path, r.summary.dump(2) + "\n");
  std::cout << human;
}

void add_common(CLI::App* sub, Common& c, bool random) {
  sub->add_option("--config", c.config_path, "JSON config (or a previous summary)")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out_path, "Output file (CSV for tabular runs, JSON otherwise)");
  sub->add_option("--summary", c.summary_path, "JSON summary file");
  if (random) {
    sub->add_option("--seed", c.seed, "Master seed (required)");
    sub->add_option("--reps", c.reps, "Monte Carlo replicates");
    sub->add_option("--threads", c.threads, "Worker threads; never changes the output")->check(CLI::PositiveNumber);
  }
}

void require_seed(const json& config) {
  if (!config.contains("seed")) throw UsageError("--seed is required");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heteroskedastic Wishart-type concentration: bounds, exact moments and simulation"};
  app.set_version_flag("--version", [] {
    char* table = nullptr;
    std::string text = std::string("wishart ") + wc_version() + "\n";
    if (wc_constants_table(&table) == WC_OK) {
      text += table;
      wc_string_free(table);
    }
    return text;
  });
  app.require_subcommand(1);

  Common c;
  // profile
  auto* profile = app.add_subcommand("profile", "Summarize a profile and print its explicit form");
  add_common(profile, c, false);
  profile->add_option("--profile", c.profile_path, "Profile JSON file")->check(CLI::ExistingFile);

  // bound
  auto* bound = app.add_subcommand("bound", "Evaluate a closed-form bound as a JSON report");
  add_common(bound, c, false);
  bound->add_option("--profile", c.profile_path, "Profile JSON file")->check(CLI::ExistingFile);
  std::string bound_id;
  std::optional<double> eps1, eps2, b, x, big_c, alpha, big_b, kappa, c0, eps, mu_norm, n_obs;
  std::string family;
  bound->add_option("--id", bound_id,
                    "gaussian, symmetrization, matrix_sum, unified, moment_tail, structured_rows, "
                    "structured_columns, lower_bound, clustering");
  bound->add_option("--eps1", eps1);
  bound->add_option("--eps2", eps2);
  bound->add_option("--b", b, "Moment order (moment_tail)");
  bound->add_option("--x", x, "Tail deviation (moment_tail)");
  bound->add_option("--C", big_c, "Universal-constant knob");
  bound->add_option("--family", family, "unified family: subgaussian, heavy_tail, bounded, gaussian");
  bound->add_option("--alpha", alpha, "psi_alpha index (unified heavy_tail)");
  bound->add_option("--B", big_b, "Almost-sure bound (unified bounded)");
  bound->add_option("--kappa", kappa);
  bound->add_option("--C0", c0);
  bound->add_option("--eps", eps);
  bound->add_option("--mu-norm", mu_norm, "|mu| (clustering)");
  bound->add_option("--n", n_obs, "Sample count (clustering)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of E||ZZ^T - EZZ^T||");
  add_common(simulate, c, true);
  simulate->add_option("--profile", c.profile_path, "Profile JSON file")->check(CLI::ExistingFile);
  std::string model_path;
  std::vector<double> tail_x;
  std::optional<double> tail_c;
  simulate->add_option("--model", model_path, "Noise model JSON file")->check(CLI::ExistingFile);
  simulate->add_option("--tail-x", tail_x, "Deviations x for tail frequencies")->delimiter(',');
  simulate->add_option("--tail-C", tail_c, "Constant C of the tail threshold");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact moment comparisons");
  add_common(oracle, c, false);
  oracle->add_option("--profile", c.profile_path, "Profile JSON file")->check(CLI::ExistingFile);
  std::string check;
  std::optional<unsigned> q;
  std::vector<unsigned> xs;
  oracle->add_option("--check", check, "comparison, contraction, deletion or paired");
  oracle->add_option("--q", q, "Moment order");
  oracle->add_option("--xs", xs, "x1..x5 for the paired check")->delimiter(',')->expected(5);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Rate sweep over a dimension grid (CSV)");
  add_common(sweep, c, true);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Spectral clustering phase diagram (CSV)");
  add_common(cluster, c, true);
  std::optional<std::size_t> n_samples, dim;
  std::optional<double> sigma;
  std::vector<double> lambdas;
  std::string lambda_unit;
  cluster->add_option("--n", n_samples, "Samples");
  cluster->add_option("--p", dim, "Dimension");
  cluster->add_option("--sigma", sigma, "Common noise standard deviation");
  cluster->add_option("--lambdas", lambdas, "Signal strengths")->delimiter(',');
  cluster->add_option("--lambda-unit", lambda_unit, "absolute or threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    json config = base_config(c);
    if (*profile) {
      emit_json_result(c, run("profile", config, 1));
    } else if (*bound) {
      if (!bound_id.empty()) config["id"] = bound_id;
      auto set = [&](const char* key, const std::optional<double>& v) {
        if (v) config[key] = *v;
      };
      set("eps1", eps1);
      set("eps2", eps2);
      set("b", b);
      set("x", x);
      set("C", big_c);
      set("alpha", alpha);
      set("B", big_b);
      set("kappa", kappa);
      set("C0", c0);
      set("eps", eps);
      set("mu_norm", mu_norm);
      set("n", n_obs);
      if (!family.empty()) config["family"] = family;
      emit_json_result(c, run("bound", config, 1));
    } else if (*simulate) {
      if (!model_path.empty()) config["model"] = read_json_file(model_path);
      if (!tail_x.empty() || tail_c) config["tail"] = {{"x", tail_x}, {"C", tail_c.value_or(1.0)}};
      require_seed(config);
      const RunResult r = run("simulate", config, c.threads);
      const json& e = r.summary.at("estimate");
      std::string human = "mean " + fmt(e.at("mean").get<double>()) + "  std_err " +
                          fmt(e.at("std_err").get<double>()) + "  reps " + std::to_string(e.at("n_reps").get<int>()) +
                          "\n";
      if (r.summary.contains("tail")) {
        for (const json& pt : r.summary.at("tail")) {
          human += "x " + fmt(pt.at("x").get<double>()) + "  frequency " + fmt(pt.at("frequency").get<double>()) +
                   "  exp(-x^2) " + fmt(pt.at("tail_prob").get<double>()) + "\n";
        }
      }
      emit_table_result(c, r, human);
    } else if (*oracle) {
      if (!check.empty()) config["check"] = check;
      if (q) config["q"] = *q;
      if (!xs.empty()) config["x"] = xs;
      emit_json_result(c, run("oracle", config, 1));
    } else if (*sweep) {
      require_seed(config);
      const RunResult r = run("sweep", config, c.threads);
      std::string human = std::to_string(r.summary.at("rows").get<int>()) + " grid points";
      if (r.summary.contains("min_ratio")) {
        human += "  ratio range [" + fmt(r.summary.at("min_ratio").get<double>()) + ", " +
                 fmt(r.summary.at("max_ratio").get<double>()) + "]";
      }
      emit_table_result(c, r, human + "\n");
    } else if (*cluster) {
      if (n_samples) config["n"] = *n_samples;
      if (dim) config["p"] = *dim;
      if (sigma) config["sigmas"] = *sigma;
      if (!lambdas.empty()) config["lambdas"] = lambdas;
      if (!lambda_unit.empty()) config["lambda_unit"] = lambda_unit;
      require_seed(config);
      const RunResult r = run("cluster", config, c.threads);
      std::string human = "snr threshold " + fmt(r.summary.at("snr_threshold").get<double>()) + "\n";
      for (const json& pt : r.summary.at("points")) {
        human += "lambda " + fmt(pt.at("lambda").get<double>()) + "  misclassification " +
                 fmt(pt.at("mean_misclassification").get<double>()) + "\n";
      }
      emit_table_result(c, r, human);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}
