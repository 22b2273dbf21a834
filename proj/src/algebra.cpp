#include "dualstab/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dualstab::algebra {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatch(std::string(what) + ": expected a nonempty square matrix, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

double asymmetry(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

Matrix sym_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double max_rel_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("max_rel_diff: shapes differ");
  }
  if (a.size() == 0) return 0.0;
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

SpdFactorization::SpdFactorization(const Matrix& m) : matrix_(m) {
  require_square(m, "cholesky");
  if (!m.allFinite()) throw NotSpd("cholesky: non-finite entries");
  if (asymmetry(m) > kSymmetryTol) throw NotSpd("cholesky: matrix is not symmetric");
  llt_.compute(m);
  const double max_diag = m.diagonal().cwiseAbs().maxCoeff();
  if (llt_.info() != Eigen::Success || max_diag <= 0.0) {
    throw NotSpd("cholesky: nonpositive pivot");
  }
  const Matrix l = llt_.matrixL();
  for (Index i = 0; i < l.rows(); ++i) {
    const double pivot = l(i, i) * l(i, i);
    if (!(pivot > kPivotTol * max_diag)) {
      throw NotSpd("cholesky: pivot " + std::to_string(i) + " = " + std::to_string(pivot) +
                   " below tolerance");
    }
  }
}

Matrix SpdFactorization::reconstruct() const {
  const Matrix l = lower();
  return l * l.transpose();
}

Vector SpdFactorization::solve(const Vector& rhs) const {
  if (rhs.size() != dim()) throw DimensionMismatch("spd_solve: rhs length differs from dimension");
  return llt_.solve(rhs);
}

Matrix SpdFactorization::solve(const Matrix& rhs) const {
  if (rhs.rows() != dim()) throw DimensionMismatch("spd_solve: rhs rows differ from dimension");
  return llt_.solve(rhs);
}

Matrix SpdFactorization::solve_lower(const Matrix& rhs) const {
  if (rhs.rows() != dim()) throw DimensionMismatch("solve_lower: rhs rows differ from dimension");
  return llt_.matrixL().solve(rhs);
}

Matrix SpdFactorization::solve_upper(const Matrix& rhs) const {
  if (rhs.rows() != dim()) throw DimensionMismatch("solve_upper: rhs rows differ from dimension");
  return llt_.matrixU().solve(rhs);
}

Matrix SpdFactorization::inverse() const {
  return sym_part(llt_.solve(Matrix::Identity(dim(), dim())));
}

SpdFactorization cholesky(const Matrix& m) { return SpdFactorization(m); }

Vector spd_solve(const SpdFactorization& f, const Vector& rhs) { return f.solve(rhs); }
Matrix spd_solve(const SpdFactorization& f, const Matrix& rhs) { return f.solve(rhs); }

EigResult sym_eig(const Matrix& a) {
  require_square(a, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym_part(a));
  if (es.info() != Eigen::Success) throw DegeneratePencil("sym_eig: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigResult sym_generalized_eig(const Matrix& a, const SpdFactorization& b) {
  require_square(a, "sym_generalized_eig");
  if (a.rows() != b.dim()) {
    throw DimensionMismatch("sym_generalized_eig: A is " + std::to_string(a.rows()) +
                            "-dimensional, B is " + std::to_string(b.dim()));
  }
  // C = L^{-1} A L^{-T}; eigenvectors of the pencil are L^{-T} y.
  const Matrix half = b.solve_lower(sym_part(a));
  const Matrix c = b.solve_lower(Matrix(half.transpose()));
  EigResult std_eig = sym_eig(c);
  std_eig.vectors = b.solve_upper(std_eig.vectors);
  return std_eig;
}

double operator_norm(const Matrix& a, const SpdFactorization& g_test,
                     const SpdFactorization& g_trial) {
  if (a.rows() != g_test.dim() || a.cols() != g_trial.dim()) {
    throw DimensionMismatch("operator_norm: A is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ", metrics are " +
                            std::to_string(g_test.dim()) + " and " +
                            std::to_string(g_trial.dim()));
  }
  const Matrix normal = a.transpose() * g_test.solve(a);
  const double top = sym_generalized_eig(normal, g_trial).max();
  return std::sqrt(std::max(top, 0.0));
}

double singular_ratio(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

double gram_norm_sq(const SpdFactorization& g, const Vector& x) {
  return x.dot(g.matrix() * x);
}

}  // namespace dualstab::algebra
