// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "wishart/samplers.hpp"

namespace wishart {

/// Matrices up to this order go through the dense symmetric eigensolver;
/// larger ones through Lanczos.
inline constexpr std::size_t kDenseEigenLimit = 64;
inline constexpr double kDefaultSpectralTol = 1e-8;

/// A = Z Z^T - E[Z Z^T], symmetrized. Throws ValidationError on a dimension
/// mismatch between Z and the profile (or the Bernoulli grid).
Matrix centered_gram(const Matrix& z, const VarianceProfile& profile, const NoiseModel& model);

/// Largest absolute eigenvalue of a symmetric matrix, to relative accuracy
/// `tol` in (0, 1e-2]. Inputs whose asymmetry exceeds 1e-9 relative are
/// rejected with ValidationError; NumericalError if Lanczos fails to certify.
double spectral_norm(const Matrix& a, double tol = kDefaultSpectralTol);

/// The two routes behind spectral_norm, exposed for cross-checking.
double spectral_norm_dense(const Matrix& a);
double spectral_norm_lanczos(const Matrix& a, double tol = kDefaultSpectralTol);

/// tr(A^q) by repeated products.
double trace_power(const Matrix& a, unsigned q);
/// tr(A^q) as the sum of eigenvalue powers.
double trace_power_from_eigenvalues(const Vector& eigenvalues, unsigned q);
/// Symmetric eigenvalues in ascending order.
Vector symmetric_eigenvalues(const Matrix& a);

}  // namespace wishart
