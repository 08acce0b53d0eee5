// SPDX-License-Identifier: Apache-2.0
#include "wishart/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wishart/error.hpp"
#include "wishart/rng.hpp"

namespace wishart {

namespace {

// Relative slack for the admissibility inequalities; sigma_C / sqrt(p1) is
// typically computed from a sqrt and would otherwise fail by one ulp.
constexpr double kAdmissibleSlack = 1e-12;

bool leq(double a, double b) { return a <= b + kAdmissibleSlack * std::max(std::abs(a), std::abs(b)); }

std::size_t floor_ratio(double num, double den) {
  const double r = num / den;
  const double nearest = std::round(r);
  // Ratios such as 2.0000000000000004 / 1 must floor to 2, not 1.9999...
  if (std::abs(r - nearest) <= 1e-12 * std::max(1.0, std::abs(r))) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::floor(r));
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

VarianceProfile::VarianceProfile(std::size_t p1, std::size_t p2, std::vector<double> sigma)
    : p1_(p1), p2_(p2), sigma_(std::move(sigma)) {
  if (p1_ == 0 || p2_ == 0) throw ValidationError("profile dimensions must be positive");
  if (sigma_.size() != p1_ * p2_) {
    throw ValidationError("profile has " + std::to_string(sigma_.size()) + " entries, expected " +
                          std::to_string(p1_ * p2_));
  }
  for (std::size_t k = 0; k < sigma_.size(); ++k) {
    if (!std::isfinite(sigma_[k]) || sigma_[k] < 0.0) {
      throw ValidationError("profile entry (" + std::to_string(k / p2_) + ", " + std::to_string(k % p2_) +
                            ") must be finite and nonnegative, got " + fmt(sigma_[k]));
    }
  }
}

VarianceProfile VarianceProfile::constant(std::size_t p1, std::size_t p2, double value) {
  return VarianceProfile(p1, p2, std::vector<double>(p1 * p2, value));
}

VarianceProfile VarianceProfile::transposed() const {
  std::vector<double> out(sigma_.size());
  for (std::size_t i = 0; i < p1_; ++i)
    for (std::size_t j = 0; j < p2_; ++j) out[j * p1_ + i] = (*this)(i, j);
  return VarianceProfile(p2_, p1_, std::move(out));
}

VarianceProfile VarianceProfile::permuted(std::span<const std::size_t> row_perm,
                                          std::span<const std::size_t> col_perm) const {
  if (row_perm.size() != p1_ || col_perm.size() != p2_) throw ValidationError("permutation size mismatch");
  std::vector<double> out(sigma_.size());
  for (std::size_t i = 0; i < p1_; ++i)
    for (std::size_t j = 0; j < p2_; ++j) out[i * p2_ + j] = (*this)(row_perm[i], col_perm[j]);
  return VarianceProfile(p1_, p2_, std::move(out));
}

ProfileSummary summarize(const VarianceProfile& profile) {
  const std::size_t p1 = profile.rows();
  const std::size_t p2 = profile.cols();
  std::vector<double> column_sums(p2, 0.0);
  double max_row = 0.0;
  double max_entry = 0.0;
  for (std::size_t i = 0; i < p1; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < p2; ++j) {
      const double v = profile.variance(i, j);
      row += v;
      column_sums[j] += v;
      max_entry = std::max(max_entry, profile(i, j));
    }
    max_row = std::max(max_row, row);
  }
  const double max_col = *std::max_element(column_sums.begin(), column_sums.end());
  return {std::sqrt(max_col), std::sqrt(max_row), max_entry, p1, p2};
}

VarianceProfile homoskedastic_rows(std::span<const double> sigmas, std::size_t p2) {
  if (sigmas.empty()) throw ValidationError("homoskedastic_rows needs at least one row scale");
  if (p2 == 0) throw ValidationError("homoskedastic_rows needs p2 >= 1");
  for (double s : sigmas) {
    if (!std::isfinite(s) || s < 0.0) throw ValidationError("row scale must be finite and nonnegative, got " + fmt(s));
  }
  std::vector<double> grid(sigmas.size() * p2);
  for (std::size_t i = 0; i < sigmas.size(); ++i) std::fill_n(grid.begin() + i * p2, p2, sigmas[i]);
  return VarianceProfile(sigmas.size(), p2, std::move(grid));
}

VarianceProfile homoskedastic_columns(std::span<const double> sigmas, std::size_t p1) {
  if (sigmas.empty()) throw ValidationError("homoskedastic_columns needs at least one column scale");
  if (p1 == 0) throw ValidationError("homoskedastic_columns needs p1 >= 1");
  for (double s : sigmas) {
    if (!std::isfinite(s) || s < 0.0) throw ValidationError("column scale must be finite and nonnegative, got " + fmt(s));
  }
  std::vector<double> grid(p1 * sigmas.size());
  for (std::size_t i = 0; i < p1; ++i) std::copy(sigmas.begin(), sigmas.end(), grid.begin() + i * sigmas.size());
  return VarianceProfile(p1, sigmas.size(), std::move(grid));
}

std::string_view to_string(LowerBoundKind kind) {
  switch (kind) {
    case LowerBoundKind::kSingleColumn: return "single_column";
    case LowerBoundKind::kBlock: return "block";
    case LowerBoundKind::kBlockDiagonal: return "block_diagonal";
  }
  return "unknown";
}

LowerBoundKind lower_bound_kind_from_string(std::string_view name) {
  if (name == "single_column") return LowerBoundKind::kSingleColumn;
  if (name == "block") return LowerBoundKind::kBlock;
  if (name == "block_diagonal") return LowerBoundKind::kBlockDiagonal;
  throw ValidationError("unknown lower-bound variant '" + std::string(name) + "'");
}

void check_lower_bound_admissible(const LowerBoundParams& p) {
  if (p.p1 == 0 || p.p2 == 0) throw ValidationError("lower-bound profile needs p1, p2 >= 1");
  for (double v : {p.sigma_star, p.sigma_C, p.sigma_R}) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("lower-bound scales must be finite and nonnegative");
  }
  if (!leq(p.sigma_star, p.sigma_C)) {
    throw ValidationError("admissibility violated: sigma_star (" + fmt(p.sigma_star) + ") > sigma_C (" +
                          fmt(p.sigma_C) + ")");
  }
  if (!leq(p.sigma_star, p.sigma_R)) {
    throw ValidationError("admissibility violated: sigma_star (" + fmt(p.sigma_star) + ") > sigma_R (" +
                          fmt(p.sigma_R) + ")");
  }
  const double col_floor = p.sigma_C / std::sqrt(static_cast<double>(p.p1));
  if (!leq(col_floor, p.sigma_star)) {
    throw ValidationError("admissibility violated: sigma_star (" + fmt(p.sigma_star) + ") < sigma_C/sqrt(p1) (" +
                          fmt(col_floor) + ")");
  }
  const double row_floor = p.sigma_R / std::sqrt(static_cast<double>(p.p2));
  if (!leq(row_floor, p.sigma_star)) {
    throw ValidationError("admissibility violated: sigma_star (" + fmt(p.sigma_star) + ") < sigma_R/sqrt(p2) (" +
                          fmt(row_floor) + ")");
  }
}

VarianceProfile lower_bound_profile(LowerBoundKind kind, const LowerBoundParams& p) {
  check_lower_bound_admissible(p);
  std::vector<double> grid(p.p1 * p.p2, 0.0);
  if (kind == LowerBoundKind::kSingleColumn) {
    const double value = std::min(p.sigma_C / std::sqrt(static_cast<double>(p.p1)), p.sigma_star);
    for (std::size_t i = 0; i < p.p1; ++i) grid[i * p.p2] = value;
    return VarianceProfile(p.p1, p.p2, std::move(grid));
  }
  if (p.sigma_star == 0.0) return VarianceProfile(p.p1, p.p2, std::move(grid));

  const double s2 = p.sigma_star * p.sigma_star;
  const std::size_t k1 = std::min(floor_ratio(p.sigma_C * p.sigma_C, s2), p.p1);
  const std::size_t k2 = std::min(floor_ratio(p.sigma_R * p.sigma_R, s2), p.p2);
  const std::size_t blocks = kind == LowerBoundKind::kBlock ? 1 : std::min(p.p1 / k1, p.p2 / k2);
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t i = b * k1; i < (b + 1) * k1; ++i)
      for (std::size_t j = b * k2; j < (b + 1) * k2; ++j) grid[i * p.p2 + j] = p.sigma_star;
  return VarianceProfile(p.p1, p.p2, std::move(grid));
}

VarianceProfile random_uniform_profile(std::size_t p1, std::size_t p2, double low, double high,
                                       std::uint64_t seed, std::uint64_t index) {
  if (!(low >= 0.0) || !(high >= low) || !std::isfinite(high)) {
    throw ValidationError("random profile needs 0 <= low <= high < inf");
  }
  rng::CounterStream stream(seed, rng::Stream::kProfileGeneration, index);
  std::vector<double> grid(p1 * p2);
  for (double& v : grid) v = low + (high - low) * (1.0 - stream.next_uniform());
  return VarianceProfile(p1, p2, std::move(grid));
}

std::vector<double> random_uniform_scales(std::size_t n, double low, double high, std::uint64_t seed,
                                          std::uint64_t index) {
  if (!(low >= 0.0) || !(high >= low) || !std::isfinite(high)) {
    throw ValidationError("random scales need 0 <= low <= high < inf");
  }
  rng::CounterStream stream(seed, rng::Stream::kProfileGeneration, index);
  std::vector<double> out(n);
  for (double& v : out) v = low + (high - low) * (1.0 - stream.next_uniform());
  return out;
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
T require(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) throw ValidationError("missing key '" + std::string(key) + "' in " + std::string(where));
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("bad value for '" + std::string(key) + "' in " + std::string(where) + ": " + e.what());
  }
}

std::size_t require_dim(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) throw ValidationError("missing key '" + std::string(key) + "' in " + std::string(where));
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ValidationError("'" + std::string(key) + "' in " + std::string(where) + " must be a positive integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

VarianceProfile profile_from_json(const json& spec) {
  if (!spec.is_object()) throw ValidationError("profile spec must be a JSON object");
  const auto kind = require<std::string>(spec, "kind", "profile");
  if (kind == "explicit") {
    reject_unknown_keys(spec, {"kind", "sigma"}, "explicit profile");
    const json& rows = spec.contains("sigma") ? spec.at("sigma") : throw ValidationError("missing key 'sigma'");
    if (!rows.is_array() || rows.empty()) throw ValidationError("'sigma' must be a nonempty array of rows");
    const std::size_t p1 = rows.size();
    if (!rows[0].is_array() || rows[0].empty()) throw ValidationError("'sigma' rows must be nonempty arrays");
    const std::size_t p2 = rows[0].size();
    std::vector<double> grid;
    grid.reserve(p1 * p2);
    for (const json& row : rows) {
      if (!row.is_array() || row.size() != p2) throw ValidationError("'sigma' rows must all have length " + std::to_string(p2));
      for (const json& v : row) {
        if (!v.is_number()) throw ValidationError("'sigma' entries must be numbers");
        grid.push_back(v.get<double>());
      }
    }
    return VarianceProfile(p1, p2, std::move(grid));
  }
  if (kind == "homoskedastic_rows" || kind == "homoskedastic_columns") {
    reject_unknown_keys(spec, {"kind", "sigmas", "other_dim"}, kind);
    const auto sigmas = require<std::vector<double>>(spec, "sigmas", kind);
    const std::size_t other = require_dim(spec, "other_dim", kind);
    return kind == "homoskedastic_rows" ? homoskedastic_rows(sigmas, other) : homoskedastic_columns(sigmas, other);
  }
  if (kind == "lower_bound") {
    reject_unknown_keys(spec, {"kind", "variant", "params"}, "lower_bound profile");
    const auto variant = lower_bound_kind_from_string(require<std::string>(spec, "variant", "lower_bound profile"));
    if (!spec.contains("params") || !spec.at("params").is_object()) {
      throw ValidationError("lower_bound profile needs a 'params' object");
    }
    const json& p = spec.at("params");
    reject_unknown_keys(p, {"sigma_star", "sigma_C", "sigma_R", "p1", "p2"}, "lower_bound params");
    LowerBoundParams params{require<double>(p, "sigma_star", "lower_bound params"),
                            require<double>(p, "sigma_C", "lower_bound params"),
                            require<double>(p, "sigma_R", "lower_bound params"),
                            require_dim(p, "p1", "lower_bound params"), require_dim(p, "p2", "lower_bound params")};
    return lower_bound_profile(variant, params);
  }
  throw ValidationError("unknown profile kind '" + kind + "'");
}

VarianceProfile profile_from_json_text(std::string_view text) {
  json spec;
  try {
    spec = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("profile JSON does not parse: ") + e.what());
  }
  return profile_from_json(spec);
}

json profile_to_json(const VarianceProfile& profile) {
  json rows = json::array();
  for (std::size_t i = 0; i < profile.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < profile.cols(); ++j) row.push_back(profile(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"kind", "explicit"}, {"sigma", std::move(rows)}};
}

std::string profile_to_json_text(const VarianceProfile& profile) { return profile_to_json(profile).dump(); }

}  // namespace wishart
