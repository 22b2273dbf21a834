#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dualstab/errors.hpp"
#include "dualstab/models.hpp"
#include "dualstab/saddle.hpp"
#include "support.hpp"

using namespace dualstab;
using namespace dualstab::saddle;
using algebra::Matrix;
using algebra::Vector;

namespace {

models::ModelConfig small(int truth = 64, int coarse = 16) {
  models::ModelConfig c;
  c.truth_elems = truth;
  c.coarse_elems = coarse;
  return c;
}

struct Built {
  SaddleProblem pb;
  Discretization d;
};

Built build(const models::ModelConfig& c) {
  SaddleProblem pb = models::build_truth(c);
  Discretization d = models::build_spaces(c, pb);
  return {std::move(pb), std::move(d)};
}

}  // namespace

TEST_CASE("gamma zero gives the plain Galerkin system") {
  const Built b = build(small());
  const StabilizedSystem s = assemble_stabilized(b.pb, b.d.with_gamma(0.0));
  const Index nu = s.nu();
  CHECK((s.K.topLeftCorner(nu, nu) - s.a_uu).norm() == 0.0);
  CHECK((s.K.bottomLeftCorner(s.nq(), nu) - s.b_uq.transpose()).norm() == 0.0);
  CHECK(s.K.bottomRightCorner(s.nq(), s.nq()).norm() == 0.0);
}

TEST_CASE("W orthogonal to the range of B leaves the Galerkin system unchanged") {
  const Built b = build(small(32, 8));
  Eigen::FullPivLU<Matrix> lu(b.pb.b_truth().transpose());
  const Subspace w(b.pb.truth_ptr(), lu.kernel().leftCols(3));
  const dualprod::DualProduct dp(w, dualprod::make_stiffness(w, {}));
  const Discretization d(b.d.U(), dp, 0.7);
  const StabilizedSystem s = assemble_stabilized(b.pb, d);
  const StabilizedSystem g = assemble_stabilized(b.pb, d.with_gamma(0.0));
  CHECK(algebra::max_rel_diff(s.K, g.K) < 1e-12);
}

TEST_CASE("three-field middle block and condensation") {
  const Built b = build(small());
  for (double g : {0.01, 0.1, 1.0}) {
    const Discretization d = b.d.with_gamma(g);
    const ThreeFieldSystem tf = assemble_three_field(b.pb, d);
    const Matrix mid = tf.M.block(tf.nu, tf.nu, tf.nw, tf.nw);
    CHECK(algebra::max_rel_diff(mid, d.dp().stiffness().matrix() / g) < 1e-15);
    const StabilizedSystem cond = static_condense(tf);
    const StabilizedSystem direct = assemble_stabilized(b.pb, d);
    CHECK(algebra::max_rel_diff(cond.K, direct.K) <= 1e-12);
    CHECK(algebra::max_rel_diff(cond.rhs, direct.rhs) <= 1e-12);
  }
  CHECK_THROWS_AS(assemble_three_field(b.pb, b.d.with_gamma(0.0)), GammaZero);
}

TEST_CASE("condensed pressure block is linear in gamma") {
  const Built b = build(small());
  const auto block = [&](double g) {
    const StabilizedSystem s = static_condense(assemble_three_field(b.pb, b.d.with_gamma(g)));
    return Matrix(s.K.bottomRightCorner(s.nq(), s.nq()));
  };
  const Matrix b1 = block(1e-3), b2 = block(2e-3);
  CHECK(algebra::max_rel_diff(b2, 2.0 * b1) < 1e-12);
}

TEST_CASE("dense solve and singular detection") {
  const Vector rhs = Vector::LinSpaced(3, 1, 3);
  double res = 1.0;
  CHECK(solve_dense(Matrix::Identity(3, 3), rhs, &res).isApprox(rhs));
  CHECK(res < 1e-15);
  Matrix sing = Matrix::Ones(3, 3);
  CHECK_THROWS_AS(solve_dense(sing, rhs), SingularSystem);
}

TEST_CASE("equal-order Galerkin is flagged singular, stabilized system is solvable") {
  const Built b = build(small());
  const StabilizedSystem g = assemble_stabilized(b.pb, b.d.with_gamma(0.0));
  CHECK(deflated_singular_ratio(g) <= kSingularTol);
  CHECK_THROWS_AS(solve(g), SingularSystem);
  const Solution s = solve(assemble_stabilized(b.pb, b.d));
  CHECK(s.residual < 1e-10);
  const Solution s3 = solve(assemble_three_field(b.pb, b.d));
  CHECK(s3.residual < 1e-10);
  CHECK((s3.u - s.u).norm() < 1e-9 * (1 + s.u.norm()));
  CHECK((recover_auxiliary(assemble_three_field(b.pb, b.d), s.u, s.p) - s3.w).norm() <
        1e-9 * (1 + s3.w.norm()));
}

TEST_CASE("constants for the exact dual product") {
  // A = G, W = truth, S = G: alpha = |A| = c* = C* = 1.
  auto c = small(32, 32);
  c.w = models::WChoice::parse("truth");
  c.pressure = models::PressureKind::p0;
  c.gamma = models::GammaChoice::parse("1");
  const Built b = build(c);
  const ConstantsReport r = constants(b.pb, b.d);
  CHECK(r.alpha == doctest::Approx(1).epsilon(1e-9));
  CHECK(r.norm_A == doctest::Approx(1).epsilon(1e-9));
  CHECK(r.c_star == doctest::Approx(1).epsilon(1e-9));
  CHECK(r.C_star == doctest::Approx(1).epsilon(1e-9));
  CHECK(r.gamma0 == doctest::Approx(2).epsilon(1e-9));
  CHECK(r.beta_gamma_at(1.0) == doctest::Approx(r.c_hat / 2).epsilon(1e-9));
}

TEST_CASE("beta_gamma formula") {
  ConstantsReport r{};
  r.alpha = r.norm_A = r.c_star = r.C_star = 1.0;
  r.c_hat = 0.25;
  CHECK(r.beta_gamma_at(1.0) == doctest::Approx(0.125));
  CHECK(r.beta_gamma_at(0.5) == doctest::Approx(0.0625));
  r.c_star = 0.0;
  CHECK(r.beta_gamma_at(1.0) == 0.0);
}

TEST_CASE("coercivity") {
  const Built b = build(small());
  const ConstantsReport r = constants(b.pb, b.d);
  const CoercivityCheck c = verify_coercivity(b.pb, b.d);
  CHECK(c.measured >= c.predicted - 1e-9);
  CHECK(c.predicted == doctest::Approx(r.beta_gamma));
  CHECK(measure_coercivity(b.pb, b.d.with_gamma(0.0)) <= 1e-9);
  CHECK_THROWS_AS(verify_coercivity(b.pb, b.d.with_gamma(2.0 * r.gamma0)), PreconditionViolated);

  auto stable = small();
  stable.pressure = models::PressureKind::p0;
  stable.gamma = models::GammaChoice::parse("0");
  const Built s = build(stable);
  // Without stabilization the symmetric part has a zero pressure block, so
  // coercivity is lost even for a stable pair; unique solvability is not.
  CHECK(std::abs(measure_coercivity(s.pb, s.d)) < 1e-12);
  CHECK(deflated_singular_ratio(assemble_stabilized(s.pb, s.d)) > 1e-6);
}

TEST_CASE("coercivity holds pointwise on random pairs") {
  const Built b = build(small());
  const StabilizedSystem s = assemble_stabilized(b.pb, b.d);
  const double bg = constants(b.pb, b.d).beta_gamma;
  std::mt19937_64 rng(99);
  const Matrix& z = s.pressure_basis;
  for (int i = 0; i < 20; ++i) {
    const Vector v = testsupport::random_vector(rng, static_cast<int>(s.nu()));
    const Vector q = z * testsupport::random_vector(rng, static_cast<int>(z.cols()));
    Vector x(s.nu() + s.nq());
    x << v, q;
    const double form = x.dot(s.K * x);
    const double norm2 = v.dot(b.d.U().gramian() * v) + q.dot(b.pb.q_gram().matrix() * q);
    CHECK(form >= bg * norm2 - 1e-9 * norm2);
  }
}

TEST_CASE("relaxed inf-sup dominates both parts") {
  const Built b = build(small());
  const RelaxedInfsup r = verify_relaxed_infsup(b.pb, b.d);
  CHECK(r.combined >= std::max(r.u_only, r.w_only) - 1e-9);
}

TEST_CASE("discrete exact pair is reproduced") {
  const auto c = small();
  const Built b = build(c);
  std::mt19937_64 rng(4);
  const Vector x = testsupport::random_vector(rng, static_cast<int>(b.d.U().dim()));
  const Vector y = b.pb.deflation().basis *
                   testsupport::random_vector(rng, static_cast<int>(b.pb.deflation().dim()));
  const SaddleProblem pb2 = models::with_discrete_solution(b.pb, b.d, x, y);
  const Solution s = solve(assemble_stabilized(pb2, b.d));
  const ExactPair e{b.d.U().embed(x), pb2.pressure_prolong() * y};
  CHECK(solution_errors(pb2, b.d, s, e).sum() < 1e-9);
  CHECK_THROWS_AS(quasi_optimality(pb2, b.d, e), DegenerateDenominator);
}

TEST_CASE("quasi-optimality with the manufactured solution") {
  const auto c = small(128, 16);
  const Built b = build(c);
  const QuasiOptimality q = quasi_optimality(b.pb, b.d, models::interpolate_exact(c));
  CHECK(q.ratio >= 1.0 - 1e-12);
  CHECK(q.ratio < 2.0);
}
