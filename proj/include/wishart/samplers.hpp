// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "wishart/profiles.hpp"

namespace wishart {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

namespace noise {

/// N(0, sigma_ij^2).
struct Gaussian {};
/// sigma_ij * (+-1), symmetric sub-Gaussian with unit kurtosis.
struct ScaledRademacher {};
/// sigma_ij * U with U uniform on [-sqrt(3), sqrt(3)]; |Z_ij| <= bound requires sigma_* sqrt(3) <= bound.
struct Bounded {
  double bound = 1.0;
};
/// A_ij - theta_ij with A_ij ~ Bernoulli(theta_ij). The grid replaces the profile.
struct Bernoulli {
  VarianceProfile theta = VarianceProfile::zeros(1, 1);
};
/// sigma_ij * G |G'|^(shape - 1) / s, s^2 = E|G'|^(2 shape - 2); psi_alpha tails with alpha = 2 / shape.
struct HeavyTail {
  double shape = 1.0;
};

}  // namespace noise

using NoiseModel = std::variant<noise::Gaussian, noise::ScaledRademacher, noise::Bounded, noise::Bernoulli,
                                noise::HeavyTail>;

enum class NoiseKind { kGaussian, kRademacher, kBounded, kBernoulli, kHeavyTail };

NoiseKind kind_of(const NoiseModel& model);
std::string_view to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view name);

/// Throws ValidationError for out-of-range model parameters (independent of any profile).
void validate(const NoiseModel& model);

/// {"model":"gaussian"|"rademacher"|"bounded"|"bernoulli"|"heavy_tail","params":{...}}
///   bounded    : {"B": positive real}
///   bernoulli  : {"theta": [[...]]}
///   heavy_tail : {"b": real >= 1}
NoiseModel noise_model_from_json(const nlohmann::json& spec);
nlohmann::json noise_model_to_json(const NoiseModel& model);

/// s_b = sqrt(E|G|^(2b - 2)) = sqrt(2^(b-1) Gamma(b - 1/2) / Gamma(1/2)).
double heavy_tail_scale(double shape);

/// Moment-based sub-Gaussian constant sup_q q^(-1/2) (E|X|^q)^(1/q) of the
/// standardized entry law, taken over integer q in [1, 256]. For HeavyTail the
/// exponent -1/2 becomes -shape/2 (the psi_alpha analogue). Empty for Bernoulli,
/// whose standardized law depends on theta.
std::optional<double> moment_kappa(const NoiseModel& model);

struct SampleSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_index = 0;
};

/// Draws Z with independent mean-zero entries. Entry (i, j) is a pure function
/// of (master_seed, replicate_index, i, j).
Matrix sample(const VarianceProfile& profile, const NoiseModel& model, SampleSeed seed);

/// Per-row sums of Var(Z_ij): the diagonal of E[Z Z^T].
Vector expected_gram_diagonal(const VarianceProfile& profile, const NoiseModel& model);
/// E[Z Z^T] as a dense p1 x p1 diagonal matrix.
Matrix expected_gram(const VarianceProfile& profile, const NoiseModel& model);

/// The profile of standard deviations actually realized by the model
/// (sqrt(theta (1 - theta)) for Bernoulli, the input profile otherwise).
VarianceProfile effective_profile(const VarianceProfile& profile, const NoiseModel& model);

}  // namespace wishart
