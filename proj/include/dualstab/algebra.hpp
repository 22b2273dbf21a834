#pragma once

// Dense symmetric linear algebra kernel: SPD factorization, solves, and the
// full symmetric-definite generalized eigendecomposition.

#include <Eigen/Dense>

#include "dualstab/errors.hpp"

namespace dualstab::algebra {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance used when checking symmetry of inputs.
inline constexpr double kSymmetryTol = 1e-12;
/// A pivot <= kPivotTol * max|diag| is reported as NotSpd.
inline constexpr double kPivotTol = 1e-12;

/// Lower-triangular Cholesky factor of an SPD matrix. Immutable once built.
class SpdFactorization {
 public:
  /// Throws NotSpd on indefinite, rank deficient or unsymmetric input.
  explicit SpdFactorization(const Matrix& m);

  Index dim() const noexcept { return matrix_.rows(); }
  /// The factored matrix.
  const Matrix& matrix() const noexcept { return matrix_; }
  Matrix lower() const { return llt_.matrixL(); }
  Matrix reconstruct() const;

  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;
  /// L^{-1} rhs
  Matrix solve_lower(const Matrix& rhs) const;
  /// L^{-T} rhs
  Matrix solve_upper(const Matrix& rhs) const;
  /// Inverse of the factored matrix, symmetrized.
  Matrix inverse() const;

 private:
  Matrix matrix_;
  Eigen::LLT<Matrix> llt_;
};

SpdFactorization cholesky(const Matrix& m);

Vector spd_solve(const SpdFactorization& f, const Vector& rhs);
Matrix spd_solve(const SpdFactorization& f, const Matrix& rhs);

/// Eigenpairs of a symmetric-definite pencil (A, B), eigenvalues ascending,
/// eigenvectors B-orthonormal and stored column-wise.
struct EigResult {
  Vector values;
  Matrix vectors;

  double min() const { return values(0); }
  double max() const { return values(values.size() - 1); }
};

/// Full spectrum of A x = lambda B x by Cholesky reduction of B.
EigResult sym_generalized_eig(const Matrix& a, const SpdFactorization& b);
/// Standard symmetric eigenproblem.
EigResult sym_eig(const Matrix& a);

/// sup_x ||A x||_{G_test^{-1}} / ||x||_{G_trial}.
double operator_norm(const Matrix& a, const SpdFactorization& g_test,
                     const SpdFactorization& g_trial);

/// Relative asymmetry max|M - M^T| / max|M| (0 for the zero matrix).
double asymmetry(const Matrix& m);
/// (M + M^T) / 2
Matrix sym_part(const Matrix& m);

/// max |a - b| / max |b|, with the denominator floored at 1e-300.
double max_rel_diff(const Matrix& a, const Matrix& b);

/// Ratio of smallest to largest singular value (0 for the zero matrix).
double singular_ratio(const Matrix& m);

/// x^T G x with G given through its factorization.
double gram_norm_sq(const SpdFactorization& g, const Vector& x);

}  // namespace dualstab::algebra
