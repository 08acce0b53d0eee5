// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exact moment-method machinery: Gaussian moments in integer arithmetic,
// closed walks on the complete bipartite graph [p1] x [p2], and exact
// expected traces of powers of (deleted-diagonal or centered) Gram matrices.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wishart/profiles.hpp"

namespace wishart {

/// Walks longer than this many cycles are refused with SizeGuardError.
inline constexpr std::uint64_t kEnumerationLimit = 100'000'000;
/// Largest alpha + 2 beta accepted by gaussian_moment.
inline constexpr unsigned kGaussianMomentOrderLimit = 64;
/// Largest alpha + 2 beta accepted by heavy_tail_moment.
inline constexpr unsigned kHeavyMomentOrderLimit = 40;
/// Default C of the sub-Gaussian moment envelope.
inline constexpr double kEnvelopeConstant = 3.0;

/// k!! for k >= -3 with (-1)!! = 1 and (-3)!! = -1, as an exact decimal string.
std::string double_factorial_exact(int k);
/// k!! rounded to double.
double double_factorial(int k);

/// E G^alpha (G^2 - 1)^beta for standard normal G, evaluated exactly as
/// sum_j (-1)^j C(beta, j) (alpha + 2 beta - 2j - 1)!! and rounded once.
/// Zero for odd alpha. SizeGuardError if alpha + 2 beta > 64.
double gaussian_moment(unsigned alpha, unsigned beta);
std::string gaussian_moment_exact(unsigned alpha, unsigned beta);

/// E F^alpha (F^2 - 1)^beta for F = G |G'|^(b - 1) (unnormalized), b >= 1.
/// Zero for odd alpha; equals gaussian_moment when b == 1.
double heavy_tail_moment(unsigned alpha, unsigned beta, double b);

/// (C kappa)^(alpha + 2 beta) E G^alpha (G^2 - 1)^beta; kappa >= 1/sqrt(2).
double subgaussian_moment_envelope(unsigned alpha, unsigned beta, double kappa, double c = kEnvelopeConstant);

/// Closed walk u1 -> v1 -> u2 -> ... -> uq -> vq -> u1 (0-based labels).
struct BipartiteCycle {
  std::vector<std::size_t> u;
  std::vector<std::size_t> v;

  std::size_t length() const noexcept { return u.size(); }
  bool operator==(const BipartiteCycle&) const = default;
  auto operator<=>(const BipartiteCycle&) const = default;
};

/// Visit counts for one edge (i, j): alpha counts half-steps u_k -> v_k -> u_{k+1}
/// with exactly one endpoint equal to i; beta counts back-and-forth steps
/// with u_k = u_{k+1} = i.
struct EdgeVisit {
  std::size_t i = 0;
  std::size_t j = 0;
  unsigned alpha = 0;
  unsigned beta = 0;
};

/// Visited edges only, sorted by (i, j). sum(alpha + 2 beta) = 2q.
struct EdgeStatistics {
  std::vector<EdgeVisit> edges;

  unsigned alpha(std::size_t i, std::size_t j) const;
  unsigned beta(std::size_t i, std::size_t j) const;
};

EdgeStatistics edge_statistics(const BipartiteCycle& cycle);

struct CycleShape {
  BipartiteCycle canonical;  ///< left and right labels renumbered by first appearance
  std::size_t m_left = 0;
  std::size_t m_right = 0;
  std::map<std::pair<unsigned, unsigned>, std::size_t> m_ab;  ///< visited edges per (alpha, beta)

  /// Nonzero expectation: no edge with odd alpha and none with (alpha, beta) = (0, 1).
  bool is_even() const;
  bool operator==(const CycleShape&) const = default;
};

CycleShape shape_of(const BipartiteCycle& cycle);

/// (p1 p2)^q, or SizeGuardError naming the count when it exceeds kEnumerationLimit.
std::uint64_t checked_cycle_count(std::size_t p1, std::size_t p2, unsigned q);

/// Odometer over all (p1 p2)^q cycles, each exactly once, in lexicographic
/// order of (u1, v1, ..., uq, vq). O(q) memory.
class CycleEnumerator {
 public:
  CycleEnumerator(std::size_t p1, std::size_t p2, unsigned q);
  /// Restricts the walk to start at left vertex u1 = first_left.
  CycleEnumerator(std::size_t p1, std::size_t p2, unsigned q, std::size_t first_left);

  const BipartiteCycle& current() const noexcept { return cycle_; }
  bool done() const noexcept { return done_; }
  void advance();
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::size_t p1_;
  std::size_t p2_;
  bool fixed_first_;
  BipartiteCycle cycle_;
  bool done_ = false;
  std::uint64_t count_;
};

/// Calls f on every cycle; returns the number visited.
std::uint64_t enumerate_cycles(std::size_t p1, std::size_t p2, unsigned q,
                               const std::function<void(const BipartiteCycle&)>& f);

/// Exact E tr{(Z Z^T - E Z Z^T)^q} for Gaussian Z with the given profile.
/// Partial sums are taken per first left vertex with compensated summation,
/// then combined in vertex order.
double exact_trace_moment(const VarianceProfile& profile, unsigned q);
/// Same expectation with every cycle weighted individually and summed flat.
double exact_trace_moment_flat(const VarianceProfile& profile, unsigned q);
/// Same expectation regrouped by shape: sum over shapes of
/// prod (alpha, beta) gaussian_moment^m_ab times the shape's summed edge weights.
double exact_trace_moment_by_shape(const VarianceProfile& profile, unsigned q);
/// E tr{(H H^T - E H H^T)^q} for an m1 x m2 all-ones profile, by summing over
/// canonical shapes with falling-factorial multiplicities. No cycle guard.
double ones_trace_moment(std::size_t m1, std::size_t m2, unsigned q);

/// Exact E tr{(Delta(Z Z^T))^q}, Delta zeroing the diagonal (uncentered).
double exact_deleted_diagonal_trace_moment(const VarianceProfile& profile, unsigned q);

struct OracleResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  std::uint64_t cycles_enumerated = 0;
};

/// lhs = exact_trace_moment(profile, q);
/// rhs = (p1/m1 ^ p2/m2) ones_trace_moment(m1, m2, q), m1 = ceil(sC^2) + q - 1,
/// m2 = ceil(sR^2) + q - 1; holds iff lhs <= rhs (1 + 1e-9).
OracleResult check_gaussian_comparison(const VarianceProfile& profile, unsigned q);
/// lhs for the profile, rhs for the profile with its last two rows merged
/// (variances added); holds iff lhs <= rhs (1 + 1e-9).
OracleResult check_variance_contraction(const VarianceProfile& profile, unsigned q);
/// lhs = deleted-diagonal moment of the profile; rhs = the same for the p1 x m
/// all-ones profile, m = ceil(sum_j s_j^4) + q - 1 with s_j = max_i sigma_ij.
OracleResult check_diagonal_deletion(const VarianceProfile& profile, unsigned q);
/// lhs = |gm(x1+x5, x3) gm(x2+x5, x4)|, rhs = gm(x1+x2, x3+x4+x5); holds iff lhs <= rhs + 1e-12.
OracleResult check_paired_moment(const std::array<unsigned, 5>& x);

/// Profile with the last two rows merged: row p1-2 gets sqrt(s_{p1-2,j}^2 + s_{p1-1,j}^2).
VarianceProfile merge_last_rows(const VarianceProfile& profile);

}  // namespace wishart
