// SPDX-License-Identifier: Apache-2.0
#pragma once

// Heteroskedastic variance profiles: a p1 x p2 grid of entrywise standard
// deviations, its (sigma_C, sigma_R, sigma_*) summary, and the named profile
// families used throughout the library.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace wishart {

/// Dense row-major grid of entrywise standard deviations. Immutable once built.
class VarianceProfile {
 public:
  /// Throws ValidationError unless p1, p2 >= 1, sigma.size() == p1 * p2 and
  /// every entry is finite and nonnegative.
  VarianceProfile(std::size_t p1, std::size_t p2, std::vector<double> sigma);

  static VarianceProfile constant(std::size_t p1, std::size_t p2, double value);
  static VarianceProfile zeros(std::size_t p1, std::size_t p2) { return constant(p1, p2, 0.0); }
  static VarianceProfile ones(std::size_t p1, std::size_t p2) { return constant(p1, p2, 1.0); }

  std::size_t rows() const noexcept { return p1_; }
  std::size_t cols() const noexcept { return p2_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return sigma_[i * p2_ + j]; }
  double variance(std::size_t i, std::size_t j) const noexcept {
    const double s = (*this)(i, j);
    return s * s;
  }
  std::span<const double> data() const noexcept { return sigma_; }

  VarianceProfile transposed() const;
  /// Rows and columns reordered: result(i, j) = this(row_perm[i], col_perm[j]).
  VarianceProfile permuted(std::span<const std::size_t> row_perm,
                           std::span<const std::size_t> col_perm) const;

  bool operator==(const VarianceProfile&) const = default;

 private:
  std::size_t p1_;
  std::size_t p2_;
  std::vector<double> sigma_;
};

struct ProfileSummary {
  double sigma_C = 0.0;     ///< sqrt of the largest column sum of variances
  double sigma_R = 0.0;     ///< sqrt of the largest row sum of variances
  double sigma_star = 0.0;  ///< largest entrywise standard deviation
  std::size_t p1 = 1;
  std::size_t p2 = 1;

  std::size_t p_min() const noexcept { return p1 < p2 ? p1 : p2; }
  std::size_t p_max() const noexcept { return p1 < p2 ? p2 : p1; }
};

ProfileSummary summarize(const VarianceProfile& profile);

/// sigma_ij = sigmas[i] for every column j.
VarianceProfile homoskedastic_rows(std::span<const double> sigmas, std::size_t p2);
/// sigma_ij = sigmas[j] for every row i.
VarianceProfile homoskedastic_columns(std::span<const double> sigmas, std::size_t p1);

enum class LowerBoundKind { kSingleColumn, kBlock, kBlockDiagonal };

std::string_view to_string(LowerBoundKind kind);
LowerBoundKind lower_bound_kind_from_string(std::string_view name);

struct LowerBoundParams {
  double sigma_star = 0.0;
  double sigma_C = 0.0;
  double sigma_R = 0.0;
  std::size_t p1 = 1;
  std::size_t p2 = 1;
};

/// Throws ValidationError naming the violated inequality unless
/// min(sigma_C, sigma_R) >= sigma_* >= max(sigma_C / sqrt(p1), sigma_R / sqrt(p2)).
void check_lower_bound_admissible(const LowerBoundParams& params);

/// The three adversarial constructions behind the minimax lower bound:
///   single_column  : first column constant at sigma_C / sqrt(p1), rest zero;
///   block          : sigma_* on the top-left k1 x k2 block, k1 = floor(sigma_C^2 / sigma_*^2),
///                    k2 = floor(sigma_R^2 / sigma_*^2);
///   block_diagonal : m copies of that block on the diagonal,
///                    m = floor(min(p1 / k1, p2 / k2)).
/// Inadmissible parameters are rejected, never clamped.
VarianceProfile lower_bound_profile(LowerBoundKind kind, const LowerBoundParams& params);

/// Independent Uniform[low, high] entries drawn from the profile-generation
/// stream of `seed`; `index` selects one profile among many from the same seed.
VarianceProfile random_uniform_profile(std::size_t p1, std::size_t p2, double low, double high,
                                       std::uint64_t seed, std::uint64_t index = 0);
/// Uniform[low, high] draws for a vector of per-row or per-column scales.
std::vector<double> random_uniform_scales(std::size_t n, double low, double high,
                                          std::uint64_t seed, std::uint64_t index = 0);

// JSON profile files.
//   {"kind":"explicit","sigma":[[...],...]}
//   {"kind":"homoskedastic_rows"|"homoskedastic_columns","sigmas":[...],"other_dim":N}
//   {"kind":"lower_bound","variant":"single_column"|"block"|"block_diagonal",
//    "params":{"sigma_star":..,"sigma_C":..,"sigma_R":..,"p1":..,"p2":..}}
VarianceProfile profile_from_json(const nlohmann::json& spec);
VarianceProfile profile_from_json_text(std::string_view text);
/// Always emits the explicit form.
nlohmann::json profile_to_json(const VarianceProfile& profile);
std::string profile_to_json_text(const VarianceProfile& profile);

}  // namespace wishart
