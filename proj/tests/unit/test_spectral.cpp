// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "wishart/error.hpp"
#include "wishart/rng.hpp"
#include "wishart/spectral.hpp"

using namespace wishart;

namespace {

Matrix random_symmetric(std::size_t n, std::uint64_t index) {
  rng::CounterStream s(17, rng::Stream::kTestMatrices, index);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = s.next_normal();
  return a;
}

}  // namespace

TEST_CASE("centered gram examples") {
  const auto ones = VarianceProfile::ones(3, 4);
  const Matrix a = centered_gram(Matrix::Zero(3, 4), ones, noise::Gaussian{});
  CHECK(a.isApprox(-4.0 * Matrix::Identity(3, 3)));
  CHECK(centered_gram(Matrix::Zero(3, 4), VarianceProfile::zeros(3, 4), noise::Gaussian{}).isZero(0.0));
  Matrix z(1, 1);
  z << 1.7;
  CHECK(centered_gram(z, VarianceProfile::ones(1, 1), noise::Gaussian{})(0, 0) ==
        doctest::Approx(1.7 * 1.7 - 1.0).epsilon(1e-15));
  CHECK_THROWS_AS(centered_gram(Matrix::Zero(2, 4), ones, noise::Gaussian{}), ValidationError);
}

TEST_CASE("centered gram against an explicit product") {
  const auto p = random_uniform_profile(7, 11, 0.0, 1.0, 3);
  const Matrix z = sample(p, noise::Gaussian{}, {8, 0});
  const Matrix a = centered_gram(z, p, noise::Gaussian{});
  Matrix ref = z * z.transpose();
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 11; ++j) ref(i, i) -= p.variance(i, j);
  CHECK((a - ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a == a.transpose());
}

TEST_CASE("spectral norm examples") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, -5, 1;
  CHECK(spectral_norm(d) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(spectral_norm(Matrix::Identity(10, 10)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(spectral_norm(Matrix::Identity(150, 150)) == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t n : {5u, 64u, 65u, 180u}) {
    rng::CounterStream s(3, rng::Stream::kTestMatrices, n);
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x(i) = s.next_normal();
    const Matrix r = x * x.transpose();
    CHECK(spectral_norm(r) == doctest::Approx(x.squaredNorm()).epsilon(1e-8));
  }
  CHECK(spectral_norm(Matrix::Zero(100, 100)) == 0.0);
}

TEST_CASE("spectral norm contract errors") {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 1) = 1e-3;
  CHECK_THROWS_AS(spectral_norm(a), ValidationError);
  CHECK_THROWS_AS(spectral_norm(Matrix::Identity(3, 3), 0.0), ValidationError);
  CHECK_THROWS_AS(spectral_norm(Matrix::Identity(3, 3), 0.1), ValidationError);
  CHECK_THROWS_AS(spectral_norm(Matrix::Zero(2, 3)), ValidationError);
}

TEST_CASE("lanczos agrees with the dense solver on 100 random matrices") {
  for (std::uint64_t k = 0; k < 100; ++k) {
    const std::size_t n = 2 + (k * 37) % 199;
    const Matrix a = random_symmetric(n, k);
    const double dense = spectral_norm_dense(a);
    CHECK(spectral_norm(a) == doctest::Approx(dense).epsilon(1e-8));
    CHECK(spectral_norm_lanczos(a, 1e-8) == doctest::Approx(dense).epsilon(1e-8));
  }
}

TEST_CASE("lanczos on clustered and indefinite spectra") {
  // Near-tied extremes of opposite sign stress both ends of the Krylov space.
  const std::size_t n = 120;
  Eigen::HouseholderQR<Matrix> qr(random_symmetric(n, 500));
  const Matrix q = qr.householderQ();
  Vector lam = Vector::LinSpaced(n, -1.0, 1.0);
  lam(0) = -10.0;
  lam(n - 1) = 10.0 - 1e-6;
  const Matrix a0 = q * lam.asDiagonal() * q.transpose();
  const Matrix a = 0.5 * (a0 + a0.transpose());
  CHECK(spectral_norm_lanczos(a, 1e-10) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(spectral_norm(-a) == doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("spectral norm is absolutely homogeneous") {
  for (std::size_t n : {20u, 100u}) {
    const Matrix a = random_symmetric(n, 1000 + n);
    const double base = spectral_norm(a);
    for (double c : {-3.0, 0.25, 7.5}) CHECK(spectral_norm(c * a) == doctest::Approx(std::abs(c) * base).epsilon(1e-8));
  }
}

TEST_CASE("trace power examples and routes") {
  const Matrix a = random_symmetric(6, 2);
  CHECK(trace_power(a, 1) == doctest::Approx(a.trace()).epsilon(1e-14));
  CHECK(trace_power(Matrix::Identity(9, 9), 7) == 9.0);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2, -1;
  CHECK(trace_power(d, 3) == 7.0);
  for (unsigned q = 1; q <= 8; ++q) {
    const Matrix b = random_symmetric(12, 100 + q);
    const double direct = trace_power(b, q);
    const double spectral = trace_power_from_eigenvalues(symmetric_eigenvalues(b), q);
    CHECK(direct == doctest::Approx(spectral).epsilon(1e-8));
  }
  CHECK_THROWS_AS(trace_power(a, 0), ValidationError);
}

TEST_CASE("moment-method sandwich for even powers") {
  for (std::uint64_t k = 0; k < 30; ++k) {
    const std::size_t n = 2 + k % 20;
    const Matrix a = random_symmetric(n, 2000 + k);
    const double norm = spectral_norm_dense(a);
    for (unsigned q : {2u, 4u, 6u, 10u}) {
      const double root = std::pow(trace_power(a, q), 1.0 / q);
      CHECK(root >= norm * (1 - 1e-12));
      CHECK(root <= std::pow(double(n), 1.0 / q) * norm * (1 + 1e-12));
    }
  }
}

TEST_CASE("symmetric eigenvalues ascend") {
  const Vector ev = symmetric_eigenvalues(random_symmetric(30, 9));
  for (Eigen::Index i = 1; i < ev.size(); ++i) CHECK(ev(i - 1) <= ev(i));
}
