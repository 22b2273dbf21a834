#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dualstab/algebra.hpp"
#include "dualstab/errors.hpp"
#include "support.hpp"

using namespace dualstab;
using algebra::Matrix;
using algebra::Vector;

TEST_CASE("cholesky of identity and a 2x2 matrix") {
  CHECK(algebra::cholesky(Matrix::Identity(2, 2)).lower().isApprox(Matrix::Identity(2, 2)));
  Matrix m(2, 2);
  m << 4, 2, 2, 3;
  const auto f = algebra::cholesky(m);
  Matrix l(2, 2);
  l << 2, 0, 1, std::sqrt(2.0);
  CHECK((f.lower() - l).norm() < 1e-14);
  CHECK((f.reconstruct() - m).norm() < 1e-14);
}

TEST_CASE("cholesky rejects indefinite, asymmetric and non-finite input") {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  CHECK_THROWS_AS(algebra::cholesky(m), NotSpd);
  m << 2, 1, 0, 2;
  CHECK_THROWS_AS(algebra::cholesky(m), NotSpd);
  m << 1, 0, 0, NAN;
  CHECK_THROWS_AS(algebra::cholesky(m), NotSpd);
  CHECK_THROWS_AS(algebra::cholesky(Matrix::Ones(2, 3)), DimensionMismatch);
}

TEST_CASE("spd_solve examples") {
  CHECK(algebra::spd_solve(algebra::cholesky(Matrix::Identity(2, 2)), Vector(Vector::LinSpaced(2, 1, 2)))
            .isApprox(Vector::LinSpaced(2, 1, 2)));
  Vector d(2);
  d << 4, 1;
  Vector rhs(2);
  rhs << 2, 3;
  const Vector x = algebra::spd_solve(algebra::cholesky(Matrix(d.asDiagonal())), rhs);
  CHECK(x(0) == doctest::Approx(0.5));
  CHECK(x(1) == doctest::Approx(3.0));
  Matrix m(2, 2);
  m << 4, 2, 2, 3;
  const Vector y = algebra::spd_solve(algebra::cholesky(m), Vector(Vector::Unit(2, 0)));
  CHECK(std::abs(y(0) - 0.375) < 1e-15);
  CHECK(std::abs(y(1) + 0.25) < 1e-15);
  CHECK_THROWS_AS(algebra::spd_solve(algebra::cholesky(m), Vector(Vector::Ones(3))),
                  DimensionMismatch);
}

TEST_CASE("generalized eigenvalues") {
  Matrix a = Vector::LinSpaced(2, 2, 8).asDiagonal();
  auto r = algebra::sym_generalized_eig(a, algebra::cholesky(Matrix::Identity(2, 2)));
  CHECK(r.min() == doctest::Approx(2));
  CHECK(r.max() == doctest::Approx(8));
  Matrix b(2, 2);
  b << 1, 0, 0, 2;
  r = algebra::sym_generalized_eig(2.0 * Matrix::Identity(2, 2), algebra::cholesky(b));
  CHECK(r.min() == doctest::Approx(1));
  CHECK(r.max() == doctest::Approx(2));
}

TEST_CASE("identity pencil against a random SPD gives reciprocal eigenvalues") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix m = testsupport::random_spd(rng, 5);
    const auto r = algebra::sym_generalized_eig(Matrix::Identity(5, 5), algebra::cholesky(m));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector recip = es.eigenvalues().cwiseInverse();
    std::sort(recip.data(), recip.data() + recip.size());
    CHECK((r.values - recip).cwiseAbs().maxCoeff() < 1e-9);
    // B-orthonormal eigenvectors
    CHECK((r.vectors.transpose() * m * r.vectors - Matrix::Identity(5, 5)).norm() < 1e-9);
  }
}

TEST_CASE("operator norm examples") {
  const auto id = algebra::cholesky(Matrix::Identity(2, 2));
  CHECK(algebra::operator_norm(Matrix::Identity(2, 2), id, id) == doctest::Approx(1));
  Matrix d(2, 2);
  d << 3, 0, 0, 1;
  CHECK(algebra::operator_norm(d, id, id) == doctest::Approx(3));
  Matrix n(2, 2);
  n << 0, 2, 0, 0;
  CHECK(algebra::operator_norm(n, id, id) == doctest::Approx(2));
}

TEST_CASE("helpers") {
  Matrix m(2, 2);
  m << 1, 2, 4, 1;
  CHECK(algebra::asymmetry(m) > 0.0);
  CHECK(algebra::asymmetry(algebra::sym_part(m)) == 0.0);
  CHECK(algebra::max_rel_diff(m, m) == 0.0);
  CHECK(algebra::singular_ratio(Matrix::Identity(3, 3)) == doctest::Approx(1));
  Matrix sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK(algebra::singular_ratio(sing) < 1e-15);
}
