#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dualstab/errors.hpp"
#include "dualstab/hilbert.hpp"
#include "support.hpp"

using namespace dualstab;
using namespace dualstab::hilbert;
using algebra::Matrix;
using algebra::Vector;

TEST_CASE("projection fixes its range and is G-orthogonal") {
  std::mt19937_64 rng(11);
  const auto truth = testsupport::random_truth(rng, 6);
  const Subspace w(truth, testsupport::random_matrix(rng, 6, 2));
  const Vector c0 = testsupport::random_vector(rng, 2);
  CHECK((orthogonal_project(w, w.embed(c0)) - c0).norm() < 1e-10);
  const Vector x = testsupport::random_vector(rng, 6);
  const Vector res = x - w.embed(orthogonal_project(w, x));
  CHECK((w.embedding().transpose() * truth->gramian() * res).norm() < 1e-10);
}

TEST_CASE("coordinate projection with identity Gramian") {
  const Subspace w(testsupport::identity_truth(4), Matrix::Identity(4, 2));
  Vector x(4);
  x << 1, 2, 3, 4;
  CHECK(orthogonal_project(w, x).isApprox(x.head(2)));
}

TEST_CASE("riesz representative and dual norm") {
  const auto id = testsupport::identity_truth(2);
  Vector f(2);
  f << 3, 4;
  CHECK(riesz_rep(*id, {f}).isApprox(f));
  CHECK(dual_norm(*id, {f}) == doctest::Approx(5));
  Matrix g(2, 2);
  g << 4, 0, 0, 1;
  const TruthSpace t(g);
  f << 2, 0;
  CHECK(riesz_rep(t, {f})(0) == doctest::Approx(0.5));
  CHECK(dual_norm(t, {f}) == doctest::Approx(1));
  CHECK(dual_norm(t, {Vector::Zero(2)}) == 0.0);
}

TEST_CASE("dual basis is self dual for orthonormal columns") {
  const Matrix e = Matrix::Identity(5, 3);
  const Subspace w(testsupport::identity_truth(5), e);
  CHECK((dual_basis(w).reps - e).norm() < 1e-14);
}

TEST_CASE("biorthogonality and projection identities on random spaces") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(2, 50);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dim(rng);
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    const auto truth = testsupport::random_truth(rng, n);
    const Subspace w(truth, testsupport::random_matrix(rng, n, k));
    const DualBasis db = dual_basis(w);
    CHECK((db.reps.transpose() * w.embedding() - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <
          1e-10);
    // Projection of x equals the dual basis applied to x.
    const Vector x = testsupport::random_vector(rng, n);
    const Vector c = orthogonal_project(w, x);
    CHECK((db.reps.transpose() * x - c).cwiseAbs().maxCoeff() < 1e-10 * (1 + c.norm()));
    // Adjoint projection preserves the pairing with W.
    const Functional f{testsupport::random_vector(rng, n)};
    const Functional pf = adjoint_project(w, f);
    const Vector cc = testsupport::random_vector(rng, k);
    CHECK(std::abs(pairing(pf, w, cc) - pairing(f, w, cc)) < 1e-10 * (1 + f.action.norm() * cc.norm()));
    // Dual Gramian of the dual basis is the inverse subspace Gramian.
    CHECK(algebra::max_rel_diff(dual_gramian(w, db), w.factor().inverse()) < 1e-9);
  }
}

TEST_CASE("adjoint projection fixes dual basis columns and annihilates W-orthogonal functionals") {
  std::mt19937_64 rng(3);
  const auto truth = testsupport::random_truth(rng, 5);
  const Subspace w(truth, Matrix::Identity(5, 2));
  const DualBasis db = dual_basis(w);
  const Vector col = db.reps.col(1);
  CHECK((adjoint_project(w, {col}).action - col).norm() < 1e-12);
  Vector f = Vector::Zero(5);
  f(3) = 1.0;  // E^T f = 0
  CHECK(adjoint_project(w, {f}).action.norm() < 1e-14);
  CHECK(pairing({db.reps.col(0)}, w, Vector::Unit(2, 0)) == doctest::Approx(1));
  CHECK(std::abs(pairing({db.reps.col(0)}, w, Vector::Unit(2, 1))) < 1e-14);
}

TEST_CASE("rank deficient embedding is rejected") {
  Matrix e(3, 2);
  e << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(Subspace(testsupport::identity_truth(3), e), NotSpd);
}
