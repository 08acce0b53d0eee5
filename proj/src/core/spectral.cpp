// SPDX-License-Identifier: Apache-2.0
#include "wishart/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wishart/error.hpp"
#include "wishart/rng.hpp"

namespace wishart {

namespace {

constexpr double kAsymmetryTol = 1e-9;
constexpr std::size_t kCheckEvery = 4;

void check_tol(double tol) {
  if (!(tol > 0.0) || tol > 1e-2) {
    throw ValidationError("spectral tolerance must lie in (0, 1e-2], got " + std::to_string(tol));
  }
}

Eigen::MatrixXd symmetrized(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("spectral routines need a square matrix");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (!std::isfinite(scale)) throw NumericalError("matrix has non-finite entries");
  if (asym > kAsymmetryTol * scale) {
    throw ValidationError("matrix is not symmetric (max |A - A^T| = " + std::to_string(asym) +
                          " exceeds 1e-9 relative)");
  }
  return 0.5 * (a + a.transpose());
}

}  // namespace

Matrix centered_gram(const Matrix& z, const VarianceProfile& profile, const NoiseModel& model) {
  const Vector expected = expected_gram_diagonal(profile, model);
  if (static_cast<std::size_t>(z.rows()) != profile.rows() || static_cast<std::size_t>(z.cols()) != profile.cols()) {
    throw ValidationError("sample is " + std::to_string(z.rows()) + "x" + std::to_string(z.cols()) +
                          " but the profile is " + std::to_string(profile.rows()) + "x" +
                          std::to_string(profile.cols()));
  }
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(z.rows(), z.rows());
  lower.selfadjointView<Eigen::Lower>().rankUpdate(z);
  Matrix a = lower.selfadjointView<Eigen::Lower>();
  a.diagonal() -= expected;
  return a;
}

Vector symmetric_eigenvalues(const Matrix& a) {
  const Eigen::MatrixXd s = symmetrized(a);
  if (s.rows() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolver did not converge");
  return solver.eigenvalues();
}

double spectral_norm_dense(const Matrix& a) {
  const Vector values = symmetric_eigenvalues(a);
  if (values.size() == 0) return 0.0;
  return std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
}

double spectral_norm_lanczos(const Matrix& a_in, double tol) {
  check_tol(tol);
  const Eigen::MatrixXd a = symmetrized(a_in);
  const Eigen::Index n = a.rows();
  if (n == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;

  // Both ends of the spectrum are read off one Krylov space; that is the same
  // as running the extremal iteration on A and on -A with a shared start.
  rng::CounterStream start(0, rng::Stream::kLanczosStart, static_cast<std::uint64_t>(n));
  auto random_unit = [&](Eigen::Index filled, const Eigen::MatrixXd& basis) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = start.next_normal();
    for (int pass = 0; pass < 2 && filled > 0; ++pass) {
      v -= basis.leftCols(filled) * (basis.leftCols(filled).transpose() * v);
    }
    return Eigen::VectorXd(v / v.norm());
  };

  Eigen::MatrixXd basis(n, n);
  std::vector<double> alphas;
  std::vector<double> betas;
  Eigen::VectorXd v = random_unit(0, basis);
  const double breakdown = 1e-13 * scale * std::sqrt(static_cast<double>(n));

  for (Eigen::Index k = 0; k < n; ++k) {
    basis.col(k) = v;
    Eigen::VectorXd w = a * v;
    const double alpha = v.dot(w);
    alphas.push_back(alpha);
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
    }
    const double beta = w.norm();
    const bool exhausted = k + 1 == n || beta <= breakdown;

    if (exhausted || (k + 1) % kCheckEvery == 0) {
      const Eigen::Index m = k + 1;
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alphas.data(), m);
      Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(betas.data(), m - 1))
                                  : Eigen::VectorXd();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      if (tri.info() != Eigen::Success) throw NumericalError("Lanczos tridiagonal eigensolver did not converge");
      const double low = tri.eigenvalues()(0);
      const double high = tri.eigenvalues()(m - 1);
      const double estimate = std::max(std::abs(low), std::abs(high));
      if (beta <= breakdown && k + 1 == n) return estimate;
      const double r_low = std::abs(beta * tri.eigenvectors()(m - 1, 0));
      const double r_high = std::abs(beta * tri.eigenvectors()(m - 1, m - 1));
      if (k + 1 == n || (r_low <= tol * estimate && r_high <= tol * estimate)) return estimate;
      if (beta <= breakdown) {
        // Invariant subspace: continue in the orthogonal complement.
        betas.push_back(0.0);
        v = random_unit(k + 1, basis);
        continue;
      }
    }
    betas.push_back(beta);
    v = w / beta;
  }
  throw NumericalError("Lanczos iteration failed to certify the spectral norm");
}

double spectral_norm(const Matrix& a, double tol) {
  check_tol(tol);
  if (static_cast<std::size_t>(a.rows()) <= kDenseEigenLimit) return spectral_norm_dense(a);
  return spectral_norm_lanczos(a, tol);
}

double trace_power(const Matrix& a, unsigned q) {
  if (q == 0) throw ValidationError("trace power needs q >= 1");
  if (a.rows() != a.cols()) throw ValidationError("trace power needs a square matrix");
  if (q == 1) return a.trace();
  Matrix power = a;
  for (unsigned k = 2; k < q; ++k) power = power * a;
  return power.cwiseProduct(a.transpose()).sum();
}

double trace_power_from_eigenvalues(const Vector& eigenvalues, unsigned q) {
  if (q == 0) throw ValidationError("trace power needs q >= 1");
  double sum = 0.0;
  double compensation = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double term = std::pow(eigenvalues(i), static_cast<double>(q));
    const double t = sum + term;
    compensation += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + compensation;
}

}  // namespace wishart
