// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte Carlo harness: concentration estimates, tail frequencies, rate sweeps
// and the two-component clustering experiment. Every result is a function of
// its inputs and master seed only; the thread count changes wall time, never
// the output.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wishart/bounds.hpp"
#include "wishart/samplers.hpp"
#include "wishart/spectral.hpp"

namespace wishart {

struct RunOptions {
  unsigned threads = 1;
  double tol = kDefaultSpectralTol;
};

inline const std::vector<double> kDefaultQuantiles = {0.05, 0.25, 0.5, 0.75, 0.95};

struct ConcentrationEstimate {
  double mean = 0.0;
  double std_err = 0.0;  ///< sample standard deviation / sqrt(n_reps)
  std::size_t n_reps = 0;
  std::vector<std::pair<double, double>> quantiles;  ///< (probability, value), type-7 interpolation
};

/// Per-seed stream for grid point / task k of a run.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t k);

/// ||Z Z^T - E Z Z^T|| for replicates 0..n_reps-1, in replicate order.
std::vector<double> replicate_norms(const VarianceProfile& profile, const NoiseModel& model, std::size_t n_reps,
                                    std::uint64_t master_seed, const RunOptions& options = {});

/// Mean, standard error and quantiles of replicate values (n >= 2).
ConcentrationEstimate summarize_replicates(std::span<const double> values,
                                           std::span<const double> probabilities = kDefaultQuantiles);

ConcentrationEstimate estimate_concentration(const VarianceProfile& profile, const NoiseModel& model,
                                             std::size_t n_reps, std::uint64_t master_seed,
                                             const RunOptions& options = {});

struct TailPoint {
  double x = 0.0;
  double threshold = 0.0;  ///< C((sC + sR + s* sqrt(log p_min) + x)^2 - sC^2)
  std::size_t exceedances = 0;
  double frequency = 0.0;
  double tail_prob = 0.0;    ///< exp(-x^2)
  double binomial_se = 0.0;  ///< sqrt(tail_prob (1 - tail_prob) / n_reps)
};

std::vector<TailPoint> tail_empirics(const VarianceProfile& profile, const NoiseModel& model, std::size_t n_reps,
                                     std::uint64_t master_seed, std::span<const double> x_grid, double c,
                                     const RunOptions& options = {});
/// Same, from precomputed replicate norms.
std::vector<TailPoint> tail_frequencies(const ProfileSummary& summary, std::span<const double> norms,
                                        std::span<const double> x_grid, double c);

enum class SweepFamily { kRandomUniform, kHomoskedasticRows, kHomoskedasticColumns, kOnes };
std::string_view to_string(SweepFamily family);
SweepFamily sweep_family_from_string(std::string_view name);

struct GridPoint {
  std::size_t p1 = 1;
  std::size_t p2 = 1;
  bool operator==(const GridPoint&) const = default;
};

/// `count` points with p1, p2 uniform on {p_min, ..., p_max}, drawn from the
/// profile-generation stream of `seed`.
std::vector<GridPoint> random_grid(std::size_t count, std::size_t p_min, std::size_t p_max, std::uint64_t seed);

struct SweepSpec {
  SweepFamily family = SweepFamily::kRandomUniform;
  std::vector<GridPoint> grid;
  double sigma_low = 0.0;   ///< random_uniform / homoskedastic scales drawn from U[low, high]
  double sigma_high = 1.0;
  NoiseModel model = noise::Gaussian{};
  std::size_t n_reps = 20;
  std::uint64_t seed = 0;
  BoundId bound_id = BoundId::kGaussianUpper;
  double eps1 = 0.1;
  double eps2 = 0.1;
};

/// Profile for grid point k of a sweep (deterministic in spec.seed and k).
VarianceProfile sweep_profile(const SweepSpec& spec, std::size_t k);

struct SweepRow {
  std::size_t index = 0;
  std::size_t p1 = 0;
  std::size_t p2 = 0;
  ProfileSummary summary;
  ConcentrationEstimate estimate;
  double bound = 0.0;
  double ratio = 0.0;  ///< estimate.mean / bound; NaN when bound == 0
};

std::vector<SweepRow> rate_sweep(const SweepSpec& spec, const RunOptions& options = {});
/// Bound value of spec.bound_id for one profile.
double sweep_bound(const SweepSpec& spec, const VarianceProfile& profile);
/// One header line plus one line per row; doubles printed with %.17g.
std::string sweep_csv(const SweepSpec& spec, std::span<const SweepRow> rows);

struct ClusteringInstance {
  std::size_t n = 0;
  std::size_t p = 0;
  Vector mu;
  std::vector<int> labels;     ///< entries in {-1, +1}
  std::vector<double> sigmas;  ///< per-coordinate noise standard deviations
};

void validate(const ClusteringInstance& instance);

/// Uniform +-1 labels from the label stream of (seed, replicate).
std::vector<int> draw_labels(std::size_t n, std::uint64_t seed, std::uint64_t replicate = 0);

/// n x p matrix with row j = l_j mu^T + noise, coordinate i of noise N(0, sigmas[i]^2).
Matrix generate_mixture(const ClusteringInstance& instance, std::uint64_t seed, std::uint64_t replicate = 0);

/// Signs of the leading eigenvector of Y Y^T (zero maps to +1).
std::vector<int> spectral_cluster(const Matrix& y);

/// (1/n) min(#{l != lhat}, #{l != -lhat}).
double misclassification(std::span<const int> l, std::span<const int> l_hat);

struct PhasePoint {
  double lambda = 0.0;
  double mean_misclassification = 0.0;
  double std_err = 0.0;
  double lambda_over_threshold = 0.0;
  std::optional<double> upper_rate;  ///< empty at lambda = 0
};

struct PhaseDiagram {
  double snr_threshold = 0.0;
  double sigma_star = 0.0;
  double sigma_tilde = 0.0;
  std::vector<PhasePoint> points;
};

/// For each lambda, mu = lambda * direction (default e_1), labels redrawn per
/// replicate, mean misclassification over n_reps replicates.
PhaseDiagram phase_diagram(std::size_t n, std::size_t p, std::span<const double> sigmas,
                           std::span<const double> lambda_grid, std::size_t n_reps, std::uint64_t seed,
                           const RunOptions& options = {}, std::optional<Vector> direction = std::nullopt);
std::string phase_diagram_csv(const PhaseDiagram& diagram);

/// printf("%.17g") for CSV and summaries.
std::string format_double(double v);

}  // namespace wishart
