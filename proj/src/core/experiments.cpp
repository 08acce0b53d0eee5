// SPDX-License-Identifier: Apache-2.0
#include "wishart/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wishart/error.hpp"
#include "wishart/parallel.hpp"
#include "wishart/rng.hpp"

namespace wishart {

namespace {

double neumaier_sum(std::span<const double> values) {
  double sum = 0.0, comp = 0.0;
  for (double x : values) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double quantile_type7(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t k) {
  return rng::mix64(master_seed ^ rng::mix64(k + 0x5EED));
}

std::vector<double> replicate_norms(const VarianceProfile& profile, const NoiseModel& model, std::size_t n_reps,
                                    std::uint64_t master_seed, const RunOptions& options) {
  validate(model);
  std::vector<double> norms(n_reps);
  parallel_for(n_reps, options.threads, [&](std::size_t r) {
    const Matrix z = sample(profile, model, {master_seed, r});
    norms[r] = spectral_norm(centered_gram(z, profile, model), options.tol);
  });
  return norms;
}

ConcentrationEstimate summarize_replicates(std::span<const double> values, std::span<const double> probabilities) {
  if (values.size() < 2) throw ValidationError("a Monte Carlo estimate needs at least 2 replicates");
  ConcentrationEstimate est;
  est.n_reps = values.size();
  const double n = static_cast<double>(values.size());
  est.mean = neumaier_sum(values) / n;
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(), [&](double v) { return (v - est.mean) * (v - est.mean); });
  est.std_err = std::sqrt(neumaier_sum(sq) / (n - 1.0)) / std::sqrt(n);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  for (double prob : probabilities) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw ValidationError("quantile probabilities must lie in [0, 1]");
    est.quantiles.emplace_back(prob, quantile_type7(sorted, prob));
  }
  return est;
}

ConcentrationEstimate estimate_concentration(const VarianceProfile& profile, const NoiseModel& model,
                                             std::size_t n_reps, std::uint64_t master_seed,
                                             const RunOptions& options) {
  if (n_reps < 2) throw ValidationError("n_reps must be >= 2");
  const auto norms = replicate_norms(profile, model, n_reps, master_seed, options);
  return summarize_replicates(norms);
}

std::vector<TailPoint> tail_frequencies(const ProfileSummary& summary, std::span<const double> norms,
                                        std::span<const double> x_grid, double c) {
  if (norms.empty()) throw ValidationError("tail frequencies need at least one replicate");
  const RateInputs s = rate_inputs(summary);
  const double n = static_cast<double>(norms.size());
  std::vector<TailPoint> out;
  for (double x : x_grid) {
    const MomentTail mt = moment_and_tail(s, 1.0, x, c);
    TailPoint pt;
    pt.x = x;
    pt.threshold = mt.tail_threshold;
    pt.exceedances = static_cast<std::size_t>(
        std::count_if(norms.begin(), norms.end(), [&](double v) { return v >= mt.tail_threshold; }));
    pt.frequency = static_cast<double>(pt.exceedances) / n;
    pt.tail_prob = mt.tail_prob;
    pt.binomial_se = std::sqrt(mt.tail_prob * (1.0 - mt.tail_prob) / n);
    out.push_back(pt);
  }
  return out;
}

std::vector<TailPoint> tail_empirics(const VarianceProfile& profile, const NoiseModel& model, std::size_t n_reps,
                                     std::uint64_t master_seed, std::span<const double> x_grid, double c,
                                     const RunOptions& options) {
  if (!(c > 0.0)) throw ValidationError("tail constant C must be > 0");
  if (n_reps < 1) throw ValidationError("n_reps must be >= 1");
  const auto norms = replicate_norms(profile, model, n_reps, master_seed, options);
  return tail_frequencies(summarize(effective_profile(profile, model)), norms, x_grid, c);
}

std::string_view to_string(SweepFamily family) {
  switch (family) {
    case SweepFamily::kRandomUniform: return "random_uniform";
    case SweepFamily::kHomoskedasticRows: return "homoskedastic_rows";
    case SweepFamily::kHomoskedasticColumns: return "homoskedastic_columns";
    case SweepFamily::kOnes: return "ones";
  }
  return "unknown";
}

SweepFamily sweep_family_from_string(std::string_view name) {
  for (SweepFamily f : {SweepFamily::kRandomUniform, SweepFamily::kHomoskedasticRows,
                        SweepFamily::kHomoskedasticColumns, SweepFamily::kOnes}) {
    if (name == to_string(f)) return f;
  }
  throw ValidationError("unknown sweep family '" + std::string(name) + "'");
}

std::vector<GridPoint> random_grid(std::size_t count, std::size_t p_min, std::size_t p_max, std::uint64_t seed) {
  if (count == 0) throw ValidationError("random grid needs count >= 1");
  if (p_min < 1 || p_max < p_min) throw ValidationError("random grid needs 1 <= p_min <= p_max");
  rng::CounterStream stream(seed, rng::Stream::kProfileGeneration, 0xA11D);
  const double width = static_cast<double>(p_max - p_min + 1);
  auto draw = [&](double u) {
    const auto k = static_cast<std::size_t>(std::ceil(u * width)) - 1;  // u in (0, 1]
    return p_min + std::min(k, p_max - p_min);
  };
  std::vector<GridPoint> grid;
  for (std::size_t k = 0; k < count; ++k) {
    const auto [a, b] = stream.next_uniforms();
    grid.push_back({draw(a), draw(b)});
  }
  return grid;
}

VarianceProfile sweep_profile(const SweepSpec& spec, std::size_t k) {
  const GridPoint g = spec.grid.at(k);
  switch (spec.family) {
    case SweepFamily::kRandomUniform:
      return random_uniform_profile(g.p1, g.p2, spec.sigma_low, spec.sigma_high, spec.seed, k);
    case SweepFamily::kHomoskedasticRows: {
      const auto scales = random_uniform_scales(g.p1, spec.sigma_low, spec.sigma_high, spec.seed, k);
      return homoskedastic_rows(scales, g.p2);
    }
    case SweepFamily::kHomoskedasticColumns: {
      const auto scales = random_uniform_scales(g.p2, spec.sigma_low, spec.sigma_high, spec.seed, k);
      return homoskedastic_columns(scales, g.p1);
    }
    case SweepFamily::kOnes: return VarianceProfile::ones(g.p1, g.p2);
  }
  throw ValidationError("unknown sweep family");
}

double sweep_bound(const SweepSpec& spec, const VarianceProfile& profile) {
  const RateInputs s = rate_inputs(summarize(effective_profile(profile, spec.model)));
  switch (spec.bound_id) {
    case BoundId::kGaussianUpper: return gaussian_upper_bound(s, spec.eps1, spec.eps2).value;
    case BoundId::kSymmetrization: return baseline_bounds(s).symmetrization.value;
    case BoundId::kMatrixSum: return baseline_bounds(s).matrix_sum.value;
    case BoundId::kStructuredRows: return structured_rates(profile, StructureKind::kRows).value;
    case BoundId::kStructuredColumns: return structured_rates(profile, StructureKind::kColumns).value;
    case BoundId::kLowerBound: return lower_bound_rate(s).value;
    default: break;
  }
  throw ValidationError("bound '" + std::string(to_string(spec.bound_id)) + "' is not available in sweeps");
}

std::vector<SweepRow> rate_sweep(const SweepSpec& spec, const RunOptions& options) {
  if (spec.grid.empty()) throw ValidationError("sweep grid is empty");
  if (spec.n_reps < 2) throw ValidationError("n_reps must be >= 2");
  if (!(spec.sigma_low >= 0.0) || !(spec.sigma_high >= spec.sigma_low)) {
    throw ValidationError("sigma range must satisfy 0 <= low <= high");
  }
  validate(spec.model);
  if (std::holds_alternative<noise::Bernoulli>(spec.model)) {
    throw ValidationError("sweeps generate their own profiles; the bernoulli model is not supported");
  }
  const std::size_t points = spec.grid.size();
  std::vector<VarianceProfile> profiles;
  profiles.reserve(points);
  for (std::size_t k = 0; k < points; ++k) profiles.push_back(sweep_profile(spec, k));

  // One task per (grid point, replicate) keeps workers busy across uneven sizes.
  std::vector<std::size_t> offsets(points + 1, 0);
  for (std::size_t k = 0; k < points; ++k) offsets[k + 1] = offsets[k] + spec.n_reps;
  std::vector<double> norms(offsets.back());
  parallel_for(norms.size(), options.threads, [&](std::size_t t) {
    const std::size_t k = t / spec.n_reps;
    const std::size_t r = t % spec.n_reps;
    const Matrix z = sample(profiles[k], spec.model, {derive_seed(spec.seed, k), r});
    norms[t] = spectral_norm(centered_gram(z, profiles[k], spec.model), options.tol);
  });

  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < points; ++k) {
    SweepRow row;
    row.index = k;
    row.p1 = spec.grid[k].p1;
    row.p2 = spec.grid[k].p2;
    row.summary = summarize(profiles[k]);
    row.estimate = summarize_replicates(std::span<const double>(norms).subspan(offsets[k], spec.n_reps));
    row.bound = sweep_bound(spec, profiles[k]);
    row.ratio = row.bound > 0.0 ? row.estimate.mean / row.bound : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const SweepSpec& spec, std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "index,family,model,p1,p2,sigma_C,sigma_R,sigma_star,n_reps,mean,std_err,q05,q50,q95,bound_id,bound,ratio\n";
  const std::string model(to_string(kind_of(spec.model)));
  for (const auto& row : rows) {
    auto q = [&](double prob) {
      for (const auto& [p, v] : row.estimate.quantiles)
        if (p == prob) return format_double(v);
      return std::string();
    };
    out << row.index << ',' << to_string(spec.family) << ',' << model << ',' << row.p1 << ',' << row.p2 << ','
        << format_double(row.summary.sigma_C) << ',' << format_double(row.summary.sigma_R) << ','
        << format_double(row.summary.sigma_star) << ',' << row.estimate.n_reps << ','
        << format_double(row.estimate.mean) << ',' << format_double(row.estimate.std_err) << ',' << q(0.05) << ','
        << q(0.5) << ',' << q(0.95) << ',' << to_string(spec.bound_id) << ',' << format_double(row.bound) << ','
        << format_double(row.ratio) << '\n';
  }
  return out.str();
}

void validate(const ClusteringInstance& instance) {
  if (instance.n < 1 || instance.p < 1) throw ValidationError("clustering needs n, p >= 1");
  if (static_cast<std::size_t>(instance.mu.size()) != instance.p) throw ValidationError("mu must have length p");
  if (instance.sigmas.size() != instance.p) throw ValidationError("sigmas must have length p");
  if (instance.labels.size() != instance.n) throw ValidationError("labels must have length n");
  for (int l : instance.labels)
    if (l != 1 && l != -1) throw ValidationError("labels must be +1 or -1");
  for (double s : instance.sigmas)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("sigmas must be finite and nonnegative");
  if (!instance.mu.allFinite()) throw ValidationError("mu must be finite");
}

std::vector<int> draw_labels(std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
  rng::CounterStream stream(seed, rng::Stream::kLabels, replicate);
  std::vector<int> labels(n);
  for (auto& l : labels) l = stream.next_uniform() <= 0.5 ? 1 : -1;
  return labels;
}

Matrix generate_mixture(const ClusteringInstance& instance, std::uint64_t seed, std::uint64_t replicate) {
  validate(instance);
  const VarianceProfile noise_profile = homoskedastic_columns(instance.sigmas, instance.n);
  Matrix y = sample(noise_profile, noise::Gaussian{}, {seed, replicate});
  for (std::size_t j = 0; j < instance.n; ++j) {
    y.row(static_cast<Eigen::Index>(j)) += static_cast<double>(instance.labels[j]) * instance.mu.transpose();
  }
  return y;
}

std::vector<int> spectral_cluster(const Matrix& y) {
  if (y.rows() < 2) throw ValidationError("clustering needs n >= 2");
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(y.rows(), y.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(y);
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed in spectral clustering");
  const Eigen::VectorXd lead = solver.eigenvectors().col(y.rows() - 1);
  std::vector<int> labels(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index j = 0; j < y.rows(); ++j) labels[static_cast<std::size_t>(j)] = lead(j) < 0.0 ? -1 : 1;
  return labels;
}

double misclassification(std::span<const int> l, std::span<const int> l_hat) {
  if (l.size() != l_hat.size()) throw ValidationError("label vectors differ in length");
  if (l.empty()) throw ValidationError("label vectors are empty");
  std::size_t disagree = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if ((l[i] != 1 && l[i] != -1) || (l_hat[i] != 1 && l_hat[i] != -1)) {
      throw ValidationError("labels must be +1 or -1");
    }
    disagree += l[i] != l_hat[i];
  }
  const std::size_t best = std::min(disagree, l.size() - disagree);
  return static_cast<double>(best) / static_cast<double>(l.size());
}

PhaseDiagram phase_diagram(std::size_t n, std::size_t p, std::span<const double> sigmas,
                           std::span<const double> lambda_grid, std::size_t n_reps, std::uint64_t seed,
                           const RunOptions& options, std::optional<Vector> direction) {
  if (n < 2 || p < 1) throw ValidationError("phase diagram needs n >= 2 and p >= 1");
  if (sigmas.size() != p) throw ValidationError("sigmas must have length p");
  if (lambda_grid.empty()) throw ValidationError("lambda grid is empty");
  if (n_reps < 2) throw ValidationError("n_reps must be >= 2");
  for (double l : lambda_grid)
    if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("lambda values must be finite and >= 0");
  Vector dir = direction.value_or(Vector::Unit(static_cast<Eigen::Index>(p), 0));
  if (static_cast<std::size_t>(dir.size()) != p || !(dir.norm() > 0.0)) {
    throw ValidationError("direction must be a nonzero vector of length p");
  }
  dir /= dir.norm();

  PhaseDiagram out;
  out.sigma_star = sigmas.empty() ? 0.0 : *std::max_element(sigmas.begin(), sigmas.end());
  out.sigma_tilde = sigma_tilde(sigmas);
  out.snr_threshold = snr_threshold(static_cast<double>(n), out.sigma_star, out.sigma_tilde);

  // Replicate r uses the same labels and noise at every lambda, so the curve
  // is compared on common random numbers.
  const std::size_t tasks = lambda_grid.size() * n_reps;
  std::vector<double> rates(tasks);
  parallel_for(tasks, options.threads, [&](std::size_t t) {
    const std::size_t li = t / n_reps;
    const std::size_t r = t % n_reps;
    ClusteringInstance inst{n, p, lambda_grid[li] * dir, draw_labels(n, seed, r),
                            std::vector<double>(sigmas.begin(), sigmas.end())};
    const Matrix y = generate_mixture(inst, seed, r);
    rates[t] = misclassification(inst.labels, spectral_cluster(y));
  });

  for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
    const auto est =
        summarize_replicates(std::span<const double>(rates).subspan(li * n_reps, n_reps), std::span<const double>());
    PhasePoint pt;
    pt.lambda = lambda_grid[li];
    pt.mean_misclassification = est.mean;
    pt.std_err = est.std_err;
    pt.lambda_over_threshold = out.snr_threshold > 0.0 ? pt.lambda / out.snr_threshold
                                                       : std::numeric_limits<double>::quiet_NaN();
    if (pt.lambda > 0.0) {
      pt.upper_rate = clustering_rates(pt.lambda, static_cast<double>(n), out.sigma_star, out.sigma_tilde).upper_rate;
    }
    out.points.push_back(pt);
  }
  return out;
}

std::string phase_diagram_csv(const PhaseDiagram& diagram) {
  std::ostringstream out;
  out << "lambda,lambda_over_threshold,snr_threshold,mean_misclassification,std_err,upper_rate\n";
  for (const auto& pt : diagram.points) {
    out << format_double(pt.lambda) << ',' << format_double(pt.lambda_over_threshold) << ','
        << format_double(diagram.snr_threshold) << ',' << format_double(pt.mean_misclassification) << ','
        << format_double(pt.std_err) << ',' << (pt.upper_rate ? format_double(*pt.upper_rate) : std::string()) << '\n';
  }
  return out.str();
}

}  // namespace wishart
