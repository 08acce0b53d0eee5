// SPDX-License-Identifier: Apache-2.0
#pragma once

// Closed-form upper bounds, lower-bound rates and clustering rates, all pure
// functions of the profile summary and the dimensions. Natural logarithms
// throughout; log(1) = 0 is never floored.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wishart/profiles.hpp"

namespace wishart {

/// Summary scales with real-valued dimensions (p1, p2 >= 1).
struct RateInputs {
  double sigma_C = 0.0;
  double sigma_R = 0.0;
  double sigma_star = 0.0;
  double p1 = 1.0;
  double p2 = 1.0;
};

RateInputs rate_inputs(const ProfileSummary& summary);

enum class BoundId {
  kGaussianUpper,
  kSymmetrization,
  kMatrixSum,
  kUnified,
  kMomentTail,
  kStructuredRows,
  kStructuredColumns,
  kLowerBound,
  kClustering,
};

std::string_view to_string(BoundId id);
BoundId bound_id_from_string(std::string_view name);

using NamedValues = std::vector<std::pair<std::string, double>>;

struct BoundReport {
  BoundId bound_id = BoundId::kGaussianUpper;
  double value = 0.0;
  NamedValues terms;   ///< additive pieces, before any common prefactor
  NamedValues params;  ///< constants and knobs used
  bool rate_only = false;  ///< true when unspecified universal constants were set to a knob
};

nlohmann::json to_json(const BoundReport& report);

/// ceil(1 / log(1 + eps1)), snapping values within 1e-12 of an integer.
double ceil_inverse_log(double eps1);
/// 10 (1 + eps1) sqrt(ceil(1 / log(1 + eps1))).
double gaussian_c1(double eps1);
/// (1 + eps1) ceil(1 / log(1 + eps1)) (25 / eps2 + 24).
double gaussian_c2(double eps1, double eps2);

/// (1+e1){2 sC sR + (1+e2) sC^2 + C1 sR s* sqrt(log p_min) + C2 s*^2 log p_min}.
BoundReport gaussian_upper_bound(const RateInputs& s, double eps1, double eps2);

struct BaselineReports {
  BoundReport symmetrization;  ///< (sC + sR + s* sqrt(log p_min))^2
  BoundReport matrix_sum;      ///< sC sR sqrt(log p2) + sC^2 (log p2)^2
};
BaselineReports baseline_bounds(const RateInputs& s);

enum class UnifiedFamily { kSubGaussian, kHeavyTail, kBounded, kGaussian };
std::string_view to_string(UnifiedFamily family);
UnifiedFamily unified_family_from_string(std::string_view name);

struct UnifiedParams {
  UnifiedFamily family = UnifiedFamily::kSubGaussian;
  std::optional<double> alpha;  ///< psi_alpha tail index, heavy tail only, in (0, 2]
  std::optional<double> bound;  ///< almost-sure bound B, bounded only
  std::optional<double> kappa;  ///< echoed only; the rate absorbs it into C
  double c = 1.0;               ///< constant inside K
  double c0 = 1.0;              ///< leading constant (sub-Gaussian, heavy tail)
  double eps = 0.0;             ///< C0 = 1 + eps (Gaussian, bounded)
};

/// C0 {(sC + sR + K)^2 - sR^2} with the family's K.
BoundReport unified_bound(const RateInputs& s, const UnifiedParams& params);

struct MomentTail {
  double moment_bound = 0.0;    ///< (sC + sR + s* sqrt(b v log p_min))^2 - sC^2
  double tail_threshold = 0.0;  ///< C ((sC + sR + s* sqrt(log p_min) + x)^2 - sC^2)
  double tail_prob = 1.0;       ///< exp(-x^2)
};
MomentTail moment_and_tail(const RateInputs& s, double b, double x, double c);
BoundReport to_report(const MomentTail& mt, double b, double x, double c);

enum class StructureKind { kRows, kColumns };

/// Rows: sum s_i^2 + sqrt(p2 sum s_i^2) max s_i.
double structured_rows_rate(std::span<const double> sigmas, std::size_t p2);
/// Columns: sqrt(p1 sum s_j^4) + p1 max s_j^2.
double structured_columns_rate(std::span<const double> sigmas, std::size_t p1);
/// Extracts the per-row (or per-column) scales; throws ValidationError
/// ("wrong structure kind") unless the profile is exactly homoskedastic that way.
BoundReport structured_rates(const VarianceProfile& profile, StructureKind kind);

/// sC^2 + sC sR + sR s* sqrt(log p) + s*^2 log p with p = p1 ^ p2; requires
/// min(sC, sR) >= s* >= max(sC / sqrt(p1), sR / sqrt(p2)).
BoundReport lower_bound_rate(const RateInputs& s);

/// (sum sigma_i^4)^(1/4).
double sigma_tilde(std::span<const double> sigmas);

struct ClusteringRates {
  double upper_rate = 0.0;     ///< min(1, (n |mu| s* + n s*^2 + sqrt(n) st^2) / (n |mu|^2))
  double snr_threshold = 0.0;  ///< s* v st / n^(1/4)
};
double snr_threshold(double n, double sigma_star, double sigma_tilde);
/// Throws ValidationError when mu_norm == 0.
ClusteringRates clustering_rates(double mu_norm, double n, double sigma_star, double sigma_tilde);

}  // namespace wishart
