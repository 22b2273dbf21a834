#include "dualstab/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dualstab::saddle {

namespace {

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

// Removes from e its mass-orthogonal component along span(kernel_ref).
Vector remove_kernel(const Vector& e, const Matrix& kernel_ref, const Matrix& mass) {
  if (kernel_ref.cols() == 0) return e;
  const Matrix mk = mass * kernel_ref;
  const Matrix gram = algebra::sym_part(kernel_ref.transpose() * mk);
  const Vector coeffs = algebra::cholesky(gram).solve(Vector(mk.transpose() * e));
  return e - kernel_ref * coeffs;
}

double mass_norm(const Matrix& mass, const Vector& e) {
  return std::sqrt(std::max(e.dot(mass * e), 0.0));
}

}  // namespace

SaddleProblem::SaddleProblem(TruthSpacePtr truth, Matrix a_truth, Matrix b_truth, Matrix q_gram,
                             Functional f, Vector g_rhs,
                             std::optional<PressureReference> reference)
    : truth_(std::move(truth)),
      a_truth_(std::move(a_truth)),
      b_truth_(std::move(b_truth)),
      q_gram_(q_gram),
      f_(std::move(f)),
      g_rhs_(std::move(g_rhs)),
      prolong_(reference ? reference->prolong : Matrix::Identity(q_gram.rows(), q_gram.rows())),
      mass_(reference ? reference->mass : q_gram),
      deflation_([&] {
        if (!truth_) throw DimensionMismatch("SaddleProblem: null truth space");
        const Index n = truth_->dim();
        if (a_truth_.rows() != n || a_truth_.cols() != n) {
          throw DimensionMismatch("SaddleProblem: A must be " + std::to_string(n) + "x" +
                                  std::to_string(n));
        }
        if (f_.action.size() != n) throw DimensionMismatch("SaddleProblem: F length");
        if (g_rhs_.size() != b_truth_.cols()) throw DimensionMismatch("SaddleProblem: G length");
        if (prolong_.cols() != q_gram_.dim() || prolong_.rows() != mass_.dim()) {
          throw DimensionMismatch("SaddleProblem: pressure reference shape");
        }
        return dualprod::deflate_pressure(*truth_, b_truth_, q_gram_);
      }()) {
  const algebra::EigResult eig = algebra::sym_generalized_eig(a_truth_, truth_->factor());
  alpha_ = eig.min();
  if (!(alpha_ > 0.0)) {
    throw PreconditionViolated("SaddleProblem: a is not coercive (alpha = " +
                               std::to_string(alpha_) + ")");
  }
  if (algebra::asymmetry(a_truth_) <= algebra::kSymmetryTol) {
    norm_A_ = std::max(std::abs(eig.min()), std::abs(eig.max()));
  } else {
    norm_A_ = algebra::operator_norm(a_truth_, truth_->factor(), truth_->factor());
  }
}

SaddleProblem SaddleProblem::with_data(Functional f, Vector g_rhs) const {
  SaddleProblem copy = *this;
  if (f.action.size() != f_.action.size() || g_rhs.size() != g_rhs_.size()) {
    throw DimensionMismatch("with_data: data shapes differ");
  }
  copy.f_ = std::move(f);
  copy.g_rhs_ = std::move(g_rhs);
  return copy;
}

Discretization::Discretization(Subspace u, dualprod::DualProduct dp, double gamma)
    : u_(std::move(u)), dp_(std::move(dp)), gamma_(gamma) {
  if (u_.parent_ptr() != dp_.aux().parent_ptr()) {
    throw DimensionMismatch("Discretization: U and W live in different truth spaces");
  }
  if (!std::isfinite(gamma_) || gamma_ < 0.0) {
    throw PreconditionViolated("Discretization: gamma must be finite and nonnegative");
  }
}

StabilizedSystem assemble_stabilized(const SaddleProblem& pb, const Discretization& d) {
  if (d.U().parent_ptr() != pb.truth_ptr()) {
    throw DimensionMismatch("assemble_stabilized: spaces are not embedded in the problem's truth space");
  }
  const Matrix& eu = d.U().embedding();
  const Matrix& ew = d.W().embedding();
  const Matrix& a = pb.a_truth();
  const Matrix& b = pb.b_truth();
  const double g = d.gamma();

  StabilizedSystem sys;
  const Matrix a_eu = a * eu;
  sys.a_uu = eu.transpose() * a_eu;
  sys.b_uq = eu.transpose() * b;
  sys.a_wu = ew.transpose() * a_eu;
  sys.b_wq = ew.transpose() * b;
  const Vector f_u = eu.transpose() * pb.f().action;
  const Vector f_w = ew.transpose() * pb.f().action;

  // X = S^{-1} B_WQ, so c(Au - Bp, Bq) = (A_WU x - B_WQ y)^T X z.
  const Matrix x = d.dp().stiffness().factor().solve(sys.b_wq);
  const Index nu = sys.nu();
  const Index nq = sys.nq();
  sys.K = Matrix::Zero(nu + nq, nu + nq);
  sys.K.topLeftCorner(nu, nu) = sys.a_uu;
  sys.K.topRightCorner(nu, nq) = -sys.b_uq;
  sys.K.bottomLeftCorner(nq, nu) = sys.b_uq.transpose() - g * (x.transpose() * sys.a_wu);
  sys.K.bottomRightCorner(nq, nq) = g * (x.transpose() * sys.b_wq);
  sys.rhs.resize(nu + nq);
  sys.rhs.head(nu) = f_u;
  sys.rhs.tail(nq) = pb.g_rhs() - g * (x.transpose() * f_w);
  sys.pressure_basis = pb.deflation().basis;
  return sys;
}

ThreeFieldSystem assemble_three_field(const SaddleProblem& pb, const Discretization& d) {
  const double g = d.gamma();
  if (!(g > 0.0)) throw GammaZero("assemble_three_field: gamma must be positive");
  if (d.U().parent_ptr() != pb.truth_ptr()) {
    throw DimensionMismatch("assemble_three_field: spaces are not embedded in the problem's truth space");
  }
  const Matrix& eu = d.U().embedding();
  const Matrix& ew = d.W().embedding();
  const Matrix a_eu = pb.a_truth() * eu;
  const Matrix b_uq = eu.transpose() * pb.b_truth();
  const Matrix b_wq = ew.transpose() * pb.b_truth();

  ThreeFieldSystem tf{.M = {},
                      .rhs = {},
                      .nu = eu.cols(),
                      .nw = ew.cols(),
                      .nq = pb.pressure_dim(),
                      .gamma = g,
                      .s = d.dp().stiffness().factor(),
                      .pressure_basis = pb.deflation().basis};
  const Index nu = tf.nu, nw = tf.nw, nq = tf.nq;
  tf.M = Matrix::Zero(nu + nw + nq, nu + nw + nq);
  tf.M.block(0, 0, nu, nu) = eu.transpose() * a_eu;
  tf.M.block(0, nu + nw, nu, nq) = -b_uq;
  tf.M.block(nu, 0, nw, nu) = ew.transpose() * a_eu;
  tf.M.block(nu, nu, nw, nw) = d.dp().stiffness().matrix() / g;
  tf.M.block(nu, nu + nw, nw, nq) = -b_wq;
  tf.M.block(nu + nw, 0, nq, nu) = b_uq.transpose();
  tf.M.block(nu + nw, nu, nq, nw) = b_wq.transpose();
  tf.rhs.resize(nu + nw + nq);
  tf.rhs.segment(0, nu) = eu.transpose() * pb.f().action;
  tf.rhs.segment(nu, nw) = ew.transpose() * pb.f().action;
  tf.rhs.segment(nu + nw, nq) = pb.g_rhs();
  return tf;
}

StabilizedSystem static_condense(const ThreeFieldSystem& tf) {
  const Index nu = tf.nu, nw = tf.nw, nq = tf.nq;
  const Index n2 = nu + nq;
  // Kept unknowns (x, y) versus the eliminated z.
  Matrix keep_keep(n2, n2), keep_z(n2, nw), z_keep(nw, n2);
  Vector r_keep(n2);
  const auto rows = [&](Index r0, Index nr, Index dst) {
    keep_keep.block(dst, 0, nr, nu) = tf.M.block(r0, 0, nr, nu);
    keep_keep.block(dst, nu, nr, nq) = tf.M.block(r0, nu + nw, nr, nq);
    keep_z.block(dst, 0, nr, nw) = tf.M.block(r0, nu, nr, nw);
    r_keep.segment(dst, nr) = tf.rhs.segment(r0, nr);
  };
  rows(0, nu, 0);
  rows(nu + nw, nq, nu);
  z_keep.leftCols(nu) = tf.M.block(nu, 0, nw, nu);
  z_keep.rightCols(nq) = tf.M.block(nu, nu + nw, nw, nq);
  const Vector r_z = tf.rhs.segment(nu, nw);

  // The (z, z) block is S / gamma, so its inverse is gamma S^{-1}.
  const Matrix zz_inv_zk = tf.gamma * tf.s.solve(z_keep);
  const Vector zz_inv_rz = tf.gamma * tf.s.solve(r_z);

  StabilizedSystem sys;
  sys.K = keep_keep - keep_z * zz_inv_zk;
  sys.rhs = r_keep - keep_z * zz_inv_rz;
  sys.a_uu = tf.M.block(0, 0, nu, nu);
  sys.b_uq = -tf.M.block(0, nu + nw, nu, nq);
  sys.a_wu = tf.M.block(nu, 0, nw, nu);
  sys.b_wq = -tf.M.block(nu, nu + nw, nw, nq);
  sys.pressure_basis = tf.pressure_basis;
  return sys;
}

Vector recover_auxiliary(const ThreeFieldSystem& tf, const Vector& x, const Vector& y) {
  if (x.size() != tf.nu || y.size() != tf.nq) throw DimensionMismatch("recover_auxiliary");
  const Index nu = tf.nu, nw = tf.nw, nq = tf.nq;
  const Vector r = tf.rhs.segment(nu, nw) - tf.M.block(nu, 0, nw, nu) * x -
                   tf.M.block(nu, nu + nw, nw, nq) * y;
  return tf.gamma * tf.s.solve(r);
}

Vector solve_dense(const Matrix& k, const Vector& rhs, double* residual) {
  if (k.rows() != k.cols() || k.rows() != rhs.size()) {
    throw DimensionMismatch("solve: system is not square or rhs length differs");
  }
  const double ratio = algebra::singular_ratio(k);
  if (ratio <= kSingularTol) {
    throw SingularSystem("solve: singular system (sigma_min/sigma_max = " +
                             std::to_string(ratio) + ")",
                         ratio);
  }
  const Eigen::PartialPivLU<Matrix> lu(k);
  Vector sol = lu.solve(rhs);
  sol += lu.solve(Vector(rhs - k * sol));  // one refinement step
  if (residual) {
    const double rn = rhs.norm();
    *residual = (k * sol - rhs).norm() / (rn > 0.0 ? rn : 1.0);
  }
  return sol;
}

namespace {

// Embedding of the deflated unknowns into the full block vector.
Matrix deflation_map(Index n_free, const Matrix& pressure_basis) {
  return block_diag(Matrix::Identity(n_free, n_free), pressure_basis);
}

}  // namespace

Solution solve(const StabilizedSystem& sys) {
  const Matrix t = deflation_map(sys.nu(), sys.pressure_basis);
  Solution s;
  const Vector red = solve_dense(t.transpose() * sys.K * t, t.transpose() * sys.rhs, &s.residual);
  const Vector full = t * red;
  s.u = full.head(sys.nu());
  s.p = full.tail(sys.nq());
  return s;
}

Solution solve(const ThreeFieldSystem& sys) {
  const Matrix t = deflation_map(sys.nu + sys.nw, sys.pressure_basis);
  Solution s;
  const Vector red = solve_dense(t.transpose() * sys.M * t, t.transpose() * sys.rhs, &s.residual);
  const Vector full = t * red;
  s.u = full.segment(0, sys.nu);
  s.w = full.segment(sys.nu, sys.nw);
  s.p = full.segment(sys.nu + sys.nw, sys.nq);
  return s;
}

double deflated_singular_ratio(const StabilizedSystem& sys) {
  const Matrix t = deflation_map(sys.nu(), sys.pressure_basis);
  return algebra::singular_ratio(t.transpose() * sys.K * t);
}

double ConstantsReport::beta_gamma_at(double g) const {
  if (!(c_star > 0.0)) return 0.0;
  const double first = g * c_star / 2.0;
  const double second = alpha - g * C_star * C_star * norm_A * norm_A / (2.0 * c_star);
  return std::min(first, second) * c_hat;
}

ConstantsReport constants(const SaddleProblem& pb, const Discretization& d) {
  const dualprod::PressureDeflation& defl = pb.deflation();
  ConstantsReport r{};
  r.alpha = pb.alpha();
  r.norm_A = pb.norm_A();
  r.beta = pb.beta();
  r.norm_B = pb.norm_B();
  r.c_hat = std::min(1.0, r.beta * r.beta);
  r.C_hat = std::max(1.0, r.norm_B * r.norm_B);
  r.kappa_star = d.dp().stiffness().kappa_star();
  r.K_star = d.dp().stiffness().K_star();
  r.c_star = dualprod::estimate_cstar(d.dp(), pb.b_truth(), defl);
  r.C_star = 1.0 / r.kappa_star;
  r.alpha_hat = dualprod::dual_infsup(pb.b_truth(), defl, d.W());
  r.beta_hat = dualprod::infsup_QW(pb.b_truth(), defl, d.W());
  r.gamma0 = 2.0 * r.alpha * r.c_star / (r.norm_A * r.norm_A * r.C_star * r.C_star);
  r.gamma_tilde0 = 2.0 * r.kappa_star * r.alpha / (r.norm_A * r.norm_A);
  r.gamma = d.gamma();
  r.beta_gamma = r.beta_gamma_at(r.gamma);
  return r;
}

double measure_coercivity(const SaddleProblem& pb, const Discretization& d) {
  const StabilizedSystem sys = assemble_stabilized(pb, d);
  const Matrix t = deflation_map(sys.nu(), sys.pressure_basis);
  const Matrix k_red = algebra::sym_part(t.transpose() * sys.K * t);
  const Matrix& z = sys.pressure_basis;
  const Matrix metric =
      block_diag(d.U().gramian(), algebra::sym_part(z.transpose() * pb.q_gram().matrix() * z));
  return algebra::sym_generalized_eig(k_red, algebra::cholesky(metric)).min();
}

CoercivityCheck verify_coercivity(const SaddleProblem& pb, const Discretization& d) {
  const ConstantsReport c = constants(pb, d);
  if (!(d.gamma() == 0.0 || d.gamma() < c.gamma0)) {
    throw PreconditionViolated("verify_coercivity: gamma = " + std::to_string(d.gamma()) +
                               " is not below gamma0 = " + std::to_string(c.gamma0));
  }
  const CoercivityCheck check{measure_coercivity(pb, d), c.beta_gamma};
  if (check.measured < check.predicted - 1e-9) {
    throw BoundViolated("coercivity on U x Q", check.measured, check.predicted);
  }
  return check;
}

RelaxedInfsup verify_relaxed_infsup(const SaddleProblem& pb, const Discretization& d) {
  const Matrix& eu = d.U().embedding();
  const Matrix& ew = d.W().embedding();
  Matrix both(eu.rows(), eu.cols() + ew.cols());
  both << eu, ew;
  RelaxedInfsup r{};
  const auto& defl = pb.deflation();
  r.combined = dualprod::infsup_over_span(pb.truth(), pb.b_truth(), defl, both);
  r.u_only = dualprod::infsup_QW(pb.b_truth(), defl, d.U());
  r.w_only = dualprod::infsup_QW(pb.b_truth(), defl, d.W());
  if (r.combined < r.w_only - 1e-9) {
    throw BoundViolated("inf-sup over U + W >= inf-sup over W", r.combined, r.w_only);
  }
  if (r.combined < r.u_only - 1e-9) {
    throw BoundViolated("inf-sup over U + W >= inf-sup over U", r.combined, r.u_only);
  }
  return r;
}

ErrorNorms solution_errors(const SaddleProblem& pb, const Discretization& d, const Solution& sol,
                           const ExactPair& exact) {
  const Matrix& mass = pb.pressure_mass().matrix();
  const Matrix kernel_ref = pb.pressure_prolong() * pb.deflation().kernel;
  ErrorNorms e{};
  e.u = pb.truth().norm(exact.u - d.U().embed(sol.u));
  e.p = mass_norm(mass, remove_kernel(exact.p - pb.pressure_prolong() * sol.p, kernel_ref, mass));
  return e;
}

ErrorNorms best_approximation(const SaddleProblem& pb, const Discretization& d,
                              const ExactPair& exact) {
  const Matrix& mass = pb.pressure_mass().matrix();
  const Matrix& r = pb.pressure_prolong();
  const Matrix kernel_ref = r * pb.deflation().kernel;
  const Vector u_best = d.U().embed(hilbert::orthogonal_project(d.U(), exact.u));
  const Matrix mr = mass * r;
  const Vector q_best =
      algebra::cholesky(algebra::sym_part(r.transpose() * mr)).solve(Vector(mr.transpose() * exact.p));
  ErrorNorms e{};
  e.u = pb.truth().norm(exact.u - u_best);
  e.p = mass_norm(mass, remove_kernel(exact.p - r * q_best, kernel_ref, mass));
  return e;
}

QuasiOptimality quasi_optimality(const SaddleProblem& pb, const Discretization& d,
                                 const ExactPair& exact) {
  const Solution sol = solve(assemble_stabilized(pb, d));
  QuasiOptimality q{};
  q.error = solution_errors(pb, d, sol, exact);
  q.best = best_approximation(pb, d, exact);
  const double scale =
      std::max(1.0, pb.truth().norm(exact.u) + mass_norm(pb.pressure_mass().matrix(), exact.p));
  if (q.best.sum() <= 1e-13 * scale) {
    throw DegenerateDenominator("quasi_optimality: exact solution lies in U x Q (error " +
                                    std::to_string(q.error.sum()) + ")",
                                q.error.sum());
  }
  q.ratio = q.error.sum() / q.best.sum();
  return q;
}

}  // namespace dualstab::saddle
