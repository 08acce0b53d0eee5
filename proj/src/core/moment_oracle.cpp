// SPDX-License-Identifier: Apache-2.0
#include "wishart/moment_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <tuple>

#include <boost/multiprecision/cpp_int.hpp>

#include "wishart/error.hpp"

namespace wishart {

namespace {

using boost::multiprecision::cpp_int;

constexpr double kComparisonSlack = 1e-9;
constexpr double kPairedSlack = 1e-12;

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

cpp_int double_factorial_int(int k) {
  if (k == -1 || k == 0) return 1;
  if (k == -3) return -1;
  if (k < -3) throw ValidationError("double factorial is defined here only for k >= -3");
  cpp_int out = 1;
  for (int m = k; m > 1; m -= 2) out *= m;
  return out;
}

cpp_int binomial_int(unsigned n, unsigned k) {
  cpp_int out = 1;
  for (unsigned i = 1; i <= k; ++i) {
    out *= n - k + i;
    out /= i;
  }
  return out;
}

cpp_int gaussian_moment_int(unsigned alpha, unsigned beta) {
  if (alpha + 2 * beta > kGaussianMomentOrderLimit) {
    throw SizeGuardError("gaussian moment order alpha + 2 beta = " + std::to_string(alpha + 2 * beta) +
                         " exceeds " + std::to_string(kGaussianMomentOrderLimit));
  }
  if (alpha % 2 == 1) return 0;
  cpp_int sum = 0;
  for (unsigned j = 0; j <= beta; ++j) {
    const cpp_int term = binomial_int(beta, j) * double_factorial_int(static_cast<int>(alpha + 2 * beta - 2 * j) - 1);
    if (j % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
  }
  return sum;
}

/// Table of gaussian_moment(alpha, beta) for alpha + 2 beta <= order.
class MomentTable {
 public:
  explicit MomentTable(unsigned order) : order_(order), values_((order + 1) * (order / 2 + 1), 0.0) {
    for (unsigned a = 0; a <= order; ++a)
      for (unsigned b = 0; a + 2 * b <= order; ++b) values_[a * (order_ / 2 + 1) + b] = gaussian_moment(a, b);
  }
  double operator()(unsigned a, unsigned b) const { return values_[a * (order_ / 2 + 1) + b]; }

 private:
  unsigned order_;
  std::vector<double> values_;
};

void accumulate_edge(std::vector<EdgeVisit>& edges, std::size_t i, std::size_t j, bool back_and_forth) {
  for (auto& e : edges) {
    if (e.i == i && e.j == j) {
      (back_and_forth ? e.beta : e.alpha) += 1;
      return;
    }
  }
  edges.push_back({i, j, back_and_forth ? 0u : 1u, back_and_forth ? 1u : 0u});
}

/// Unsorted visit list; cheaper than edge_statistics for the hot loops.
void collect_edges(const BipartiteCycle& c, std::vector<EdgeVisit>& edges) {
  edges.clear();
  const std::size_t q = c.length();
  for (std::size_t k = 0; k < q; ++k) {
    const std::size_t a = c.u[k];
    const std::size_t b = c.u[(k + 1) % q];
    const std::size_t j = c.v[k];
    if (a == b) {
      accumulate_edge(edges, a, j, true);
    } else {
      accumulate_edge(edges, a, j, false);
      accumulate_edge(edges, b, j, false);
    }
  }
}

double moment_factor(const std::vector<EdgeVisit>& edges, const MomentTable& table) {
  double m = 1.0;
  for (const auto& e : edges) {
    m *= table(e.alpha, e.beta);
    if (m == 0.0) return 0.0;
  }
  return m;
}

double sigma_factor(const std::vector<EdgeVisit>& edges, const VarianceProfile& profile) {
  double w = 1.0;
  for (const auto& e : edges) {
    const double s = profile(e.i, e.j);
    const unsigned power = e.alpha + 2 * e.beta;
    for (unsigned t = 0; t < power; ++t) w *= s;
  }
  return w;
}

bool has_back_and_forth(const BipartiteCycle& c) {
  const std::size_t q = c.length();
  for (std::size_t k = 0; k < q; ++k)
    if (c.u[k] == c.u[(k + 1) % q]) return true;
  return false;
}

void check_q(unsigned q) {
  if (q == 0) throw ValidationError("moment order q must be >= 1");
}

double snapped_ceil(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-12 * std::max(1.0, std::abs(nearest))) return nearest;
  return std::ceil(x);
}

double falling(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double out = 1.0;
  for (std::size_t t = 0; t < k; ++t) out *= static_cast<double>(n - t);
  return out;
}

/// Calls f on every restricted growth string of length q (labels by first appearance).
void for_each_growth_string(unsigned q, const std::function<void(const std::vector<std::size_t>&, std::size_t)>& f) {
  std::vector<std::size_t> s(q, 0);
  std::function<void(unsigned, std::size_t)> rec = [&](unsigned pos, std::size_t used) {
    if (pos == q) {
      f(s, used);
      return;
    }
    for (std::size_t label = 0; label <= used && label < q; ++label) {
      s[pos] = label;
      rec(pos + 1, std::max(used, label + 1));
    }
  };
  rec(0, 0);
}

std::uint64_t bell_number(unsigned q) {
  std::vector<std::uint64_t> row{1};
  for (unsigned n = 0; n < q; ++n) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

double ones_shape_sum(std::size_t m1, std::size_t m2, unsigned q, bool deleted_diagonal) {
  check_q(q);
  const std::uint64_t shapes = bell_number(q);
  if (q > 12 || shapes * shapes > kEnumerationLimit) {
    throw SizeGuardError("shape enumeration for q = " + std::to_string(q) + " visits " +
                         std::to_string(shapes) + "^2 shapes, above the limit of " +
                         std::to_string(kEnumerationLimit));
  }
  const MomentTable table(2 * q);
  CompensatedSum total;
  std::vector<EdgeVisit> edges;
  BipartiteCycle c;
  for_each_growth_string(q, [&](const std::vector<std::size_t>& u, std::size_t m_left) {
    const double left = falling(m1, m_left);
    if (left == 0.0) return;
    c.u = u;
    if (deleted_diagonal) {
      c.v.assign(q, 0);
      if (has_back_and_forth(c)) return;
    }
    for_each_growth_string(q, [&](const std::vector<std::size_t>& v, std::size_t m_right) {
      const double right = falling(m2, m_right);
      if (right == 0.0) return;
      c.v = v;
      collect_edges(c, edges);
      const double m = moment_factor(edges, table);
      if (m != 0.0) total.add(m * left * right);
    });
  });
  return total.value();
}

}  // namespace

std::string double_factorial_exact(int k) { return double_factorial_int(k).str(); }

double double_factorial(int k) { return double_factorial_int(k).convert_to<double>(); }

double gaussian_moment(unsigned alpha, unsigned beta) { return gaussian_moment_int(alpha, beta).convert_to<double>(); }

std::string gaussian_moment_exact(unsigned alpha, unsigned beta) { return gaussian_moment_int(alpha, beta).str(); }

double heavy_tail_moment(unsigned alpha, unsigned beta, double b) {
  if (!(b >= 1.0) || !std::isfinite(b)) throw ValidationError("heavy tail shape b must be finite and >= 1");
  if (alpha + 2 * beta > kHeavyMomentOrderLimit) {
    throw SizeGuardError("heavy tail moment order alpha + 2 beta = " + std::to_string(alpha + 2 * beta) +
                         " exceeds " + std::to_string(kHeavyMomentOrderLimit));
  }
  if (alpha % 2 == 1) return 0.0;
  if (b == 1.0) return gaussian_moment(alpha, beta);
  // E F^x = (x - 1)!! 2^((b-1)x/2) Gamma(((b-1)x + 1)/2) / sqrt(pi) for even x.
  auto power_moment = [b](unsigned x) -> long double {
    if (x == 0) return 1.0L;
    const long double e = static_cast<long double>(b - 1.0) * x;
    const long double log_abs = 0.5L * e * std::log(2.0L) + std::lgamma(0.5L * (e + 1.0L)) -
                                0.5L * std::log(std::numbers::pi_v<long double>);
    return static_cast<long double>(double_factorial(static_cast<int>(x) - 1)) * std::exp(log_abs);
  };
  long double sum = 0.0L;
  long double binom = 1.0L;
  for (unsigned j = 0; j <= beta; ++j) {
    const long double term = binom * power_moment(alpha + 2 * beta - 2 * j);
    sum += (j % 2 == 0) ? term : -term;
    binom = binom * (beta - j) / (j + 1);
  }
  return static_cast<double>(sum);
}

double subgaussian_moment_envelope(unsigned alpha, unsigned beta, double kappa, double c) {
  if (!(kappa >= std::numbers::sqrt2 / 2.0 - 1e-15) || !std::isfinite(kappa)) {
    throw ValidationError("envelope needs kappa >= 1/sqrt(2)");
  }
  if (!(c > 0.0)) throw ValidationError("envelope constant must be > 0");
  const double g = gaussian_moment(alpha, beta);
  if (alpha % 2 == 1) return 0.0;
  return std::pow(c * kappa, static_cast<double>(alpha + 2 * beta)) * g;
}

unsigned EdgeStatistics::alpha(std::size_t i, std::size_t j) const {
  for (const auto& e : edges)
    if (e.i == i && e.j == j) return e.alpha;
  return 0;
}

unsigned EdgeStatistics::beta(std::size_t i, std::size_t j) const {
  for (const auto& e : edges)
    if (e.i == i && e.j == j) return e.beta;
  return 0;
}

EdgeStatistics edge_statistics(const BipartiteCycle& cycle) {
  if (cycle.u.empty() || cycle.u.size() != cycle.v.size()) {
    throw ValidationError("a cycle needs equal, nonzero numbers of left and right steps");
  }
  EdgeStatistics out;
  collect_edges(cycle, out.edges);
  std::sort(out.edges.begin(), out.edges.end(),
            [](const EdgeVisit& a, const EdgeVisit& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  return out;
}

bool CycleShape::is_even() const {
  for (const auto& [ab, count] : m_ab) {
    if (count == 0) continue;
    if (ab.first % 2 == 1) return false;
    if (ab.first == 0 && ab.second == 1) return false;
  }
  return true;
}

CycleShape shape_of(const BipartiteCycle& cycle) {
  const EdgeStatistics stats = edge_statistics(cycle);
  CycleShape shape;
  auto relabel = [](const std::vector<std::size_t>& seq, std::size_t& distinct) {
    std::map<std::size_t, std::size_t> seen;
    std::vector<std::size_t> out;
    out.reserve(seq.size());
    for (std::size_t x : seq) {
      auto [it, inserted] = seen.emplace(x, seen.size());
      out.push_back(it->second);
    }
    distinct = seen.size();
    return out;
  };
  shape.canonical.u = relabel(cycle.u, shape.m_left);
  shape.canonical.v = relabel(cycle.v, shape.m_right);
  for (const auto& e : stats.edges) ++shape.m_ab[{e.alpha, e.beta}];
  return shape;
}

std::uint64_t checked_cycle_count(std::size_t p1, std::size_t p2, unsigned q) {
  check_q(q);
  if (p1 == 0 || p2 == 0) throw ValidationError("dimensions must be >= 1");
  const long double per_step = static_cast<long double>(p1) * static_cast<long double>(p2);
  const long double total = std::pow(per_step, static_cast<long double>(q));
  if (total > static_cast<long double>(kEnumerationLimit)) {
    char buf[160];
    const char* format = total < 1e19L ? "cycle enumeration would visit (%zu*%zu)^%u = %.0Lf cycles, above the limit of %llu"
                                       : "cycle enumeration would visit (%zu*%zu)^%u = %.4Lg cycles, above the limit of %llu";
    std::snprintf(buf, sizeof buf, format, p1, p2, q, total, static_cast<unsigned long long>(kEnumerationLimit));
    throw SizeGuardError(buf);
  }
  std::uint64_t count = 1;
  for (unsigned k = 0; k < q; ++k) count *= static_cast<std::uint64_t>(p1 * p2);
  return count;
}

CycleEnumerator::CycleEnumerator(std::size_t p1, std::size_t p2, unsigned q)
    : p1_(p1), p2_(p2), fixed_first_(false), count_(checked_cycle_count(p1, p2, q)) {
  cycle_.u.assign(q, 0);
  cycle_.v.assign(q, 0);
}

CycleEnumerator::CycleEnumerator(std::size_t p1, std::size_t p2, unsigned q, std::size_t first_left)
    : CycleEnumerator(p1, p2, q) {
  if (first_left >= p1) throw ValidationError("first left vertex out of range");
  fixed_first_ = true;
  cycle_.u[0] = first_left;
  count_ /= p1;
}

void CycleEnumerator::advance() {
  if (done_) return;
  const std::size_t q = cycle_.length();
  // Least significant digit is v_q, then u_q, ..., v_1, u_1.
  for (std::size_t pos = q; pos-- > 0;) {
    if (++cycle_.v[pos] < p2_) return;
    cycle_.v[pos] = 0;
    if (pos == 0 && fixed_first_) break;
    if (++cycle_.u[pos] < p1_) return;
    cycle_.u[pos] = 0;
  }
  done_ = true;
}

std::uint64_t enumerate_cycles(std::size_t p1, std::size_t p2, unsigned q,
                               const std::function<void(const BipartiteCycle&)>& f) {
  std::uint64_t visited = 0;
  for (CycleEnumerator e(p1, p2, q); !e.done(); e.advance()) {
    f(e.current());
    ++visited;
  }
  return visited;
}

double exact_trace_moment(const VarianceProfile& profile, unsigned q) {
  checked_cycle_count(profile.rows(), profile.cols(), q);
  if (q == 1) return 0.0;
  const MomentTable table(2 * q);
  std::vector<EdgeVisit> edges;
  CompensatedSum total;
  for (std::size_t first = 0; first < profile.rows(); ++first) {
    CompensatedSum part;
    for (CycleEnumerator e(profile.rows(), profile.cols(), q, first); !e.done(); e.advance()) {
      collect_edges(e.current(), edges);
      const double m = moment_factor(edges, table);
      if (m != 0.0) part.add(m * sigma_factor(edges, profile));
    }
    total.add(part.value());
  }
  return total.value();
}

double exact_trace_moment_flat(const VarianceProfile& profile, unsigned q) {
  checked_cycle_count(profile.rows(), profile.cols(), q);
  const MomentTable table(2 * q);
  std::vector<EdgeVisit> edges;
  CompensatedSum total;
  enumerate_cycles(profile.rows(), profile.cols(), q, [&](const BipartiteCycle& c) {
    collect_edges(c, edges);
    total.add(moment_factor(edges, table) * sigma_factor(edges, profile));
  });
  return total.value();
}

double exact_trace_moment_by_shape(const VarianceProfile& profile, unsigned q) {
  checked_cycle_count(profile.rows(), profile.cols(), q);
  struct Group {
    double moment = 1.0;
    CompensatedSum weight;
  };
  std::map<BipartiteCycle, Group> groups;
  std::vector<EdgeVisit> edges;
  enumerate_cycles(profile.rows(), profile.cols(), q, [&](const BipartiteCycle& c) {
    const CycleShape shape = shape_of(c);
    auto [it, inserted] = groups.try_emplace(shape.canonical);
    if (inserted) {
      double m = 1.0;
      for (const auto& [ab, count] : shape.m_ab)
        m *= std::pow(gaussian_moment(ab.first, ab.second), static_cast<double>(count));
      it->second.moment = m;
    }
    collect_edges(c, edges);
    it->second.weight.add(sigma_factor(edges, profile));
  });
  CompensatedSum total;
  for (const auto& [_, g] : groups) total.add(g.moment * g.weight.value());
  return total.value();
}

double ones_trace_moment(std::size_t m1, std::size_t m2, unsigned q) {
  if (m1 == 0 || m2 == 0) throw ValidationError("dimensions must be >= 1");
  if (q == 1) return 0.0;
  return ones_shape_sum(m1, m2, q, false);
}

double exact_deleted_diagonal_trace_moment(const VarianceProfile& profile, unsigned q) {
  checked_cycle_count(profile.rows(), profile.cols(), q);
  const MomentTable table(2 * q);
  std::vector<EdgeVisit> edges;
  CompensatedSum total;
  for (CycleEnumerator e(profile.rows(), profile.cols(), q); !e.done(); e.advance()) {
    const BipartiteCycle& c = e.current();
    if (has_back_and_forth(c)) continue;
    collect_edges(c, edges);
    const double m = moment_factor(edges, table);
    if (m != 0.0) total.add(m * sigma_factor(edges, profile));
  }
  return total.value();
}

VarianceProfile merge_last_rows(const VarianceProfile& profile) {
  const std::size_t p1 = profile.rows();
  const std::size_t p2 = profile.cols();
  if (p1 < 2) throw ValidationError("row merge needs p1 >= 2");
  std::vector<double> sigma(profile.data().begin(), profile.data().begin() + static_cast<std::ptrdiff_t>((p1 - 1) * p2));
  for (std::size_t j = 0; j < p2; ++j) {
    sigma[(p1 - 2) * p2 + j] = std::sqrt(profile.variance(p1 - 2, j) + profile.variance(p1 - 1, j));
  }
  return VarianceProfile(p1 - 1, p2, std::move(sigma));
}

OracleResult check_gaussian_comparison(const VarianceProfile& profile, unsigned q) {
  check_q(q);
  const ProfileSummary s = summarize(profile);
  const std::size_t m1 = static_cast<std::size_t>(snapped_ceil(s.sigma_C * s.sigma_C)) + q - 1;
  const std::size_t m2 = static_cast<std::size_t>(snapped_ceil(s.sigma_R * s.sigma_R)) + q - 1;
  OracleResult r;
  r.cycles_enumerated = checked_cycle_count(profile.rows(), profile.cols(), q);
  r.lhs = exact_trace_moment(profile, q);
  if (m1 == 0 || m2 == 0) {
    // Zero profile at q = 1: both sides vanish.
    r.rhs = 0.0;
  } else {
    const double factor = std::min(static_cast<double>(s.p1) / static_cast<double>(m1),
                                   static_cast<double>(s.p2) / static_cast<double>(m2));
    r.rhs = factor * ones_trace_moment(m1, m2, q);
  }
  r.holds = r.lhs <= r.rhs * (1.0 + kComparisonSlack);
  return r;
}

OracleResult check_variance_contraction(const VarianceProfile& profile, unsigned q) {
  check_q(q);
  const VarianceProfile merged = merge_last_rows(profile);
  OracleResult r;
  r.cycles_enumerated = checked_cycle_count(profile.rows(), profile.cols(), q) +
                        checked_cycle_count(merged.rows(), merged.cols(), q);
  r.lhs = exact_trace_moment(profile, q);
  r.rhs = exact_trace_moment(merged, q);
  r.holds = r.lhs <= r.rhs + kComparisonSlack * std::abs(r.rhs);
  return r;
}

OracleResult check_diagonal_deletion(const VarianceProfile& profile, unsigned q) {
  check_q(q);
  double sum4 = 0.0;
  for (std::size_t j = 0; j < profile.cols(); ++j) {
    double column_max = 0.0;
    for (std::size_t i = 0; i < profile.rows(); ++i) column_max = std::max(column_max, profile(i, j));
    sum4 += column_max * column_max * column_max * column_max;
  }
  const std::size_t m = static_cast<std::size_t>(snapped_ceil(sum4)) + q - 1;
  OracleResult r;
  r.cycles_enumerated = checked_cycle_count(profile.rows(), profile.cols(), q);
  r.lhs = exact_deleted_diagonal_trace_moment(profile, q);
  r.rhs = m == 0 ? 0.0 : ones_shape_sum(profile.rows(), m, q, true);
  r.holds = r.lhs <= r.rhs + kComparisonSlack * std::abs(r.rhs);
  return r;
}

OracleResult check_paired_moment(const std::array<unsigned, 5>& x) {
  const unsigned order = x[0] + x[1] + 2 * (x[2] + x[3] + x[4]);
  if (order > 40) {
    throw SizeGuardError("paired moment order x1 + x2 + 2(x3 + x4 + x5) = " + std::to_string(order) +
                         " exceeds 40");
  }
  OracleResult r;
  r.lhs = std::abs(gaussian_moment(x[0] + x[4], x[2]) * gaussian_moment(x[1] + x[4], x[3]));
  r.rhs = gaussian_moment(x[0] + x[1], x[2] + x[3] + x[4]);
  r.holds = r.lhs <= r.rhs + kPairedSlack;
  return r;
}

}  // namespace wishart
