#pragma once

// Finite-dimensional model of a Hilbert space V and its dual V'.
//
// Every element of V is a coefficient vector on the basis of a fine "truth"
// space carrying an SPD Gramian G. Functionals are stored by their action on
// that basis, so the pairing of f with x is the dot product f.x and the dual
// norm is sqrt(f^T G^{-1} f).

#include <memory>
#include <string>

#include "dualstab/algebra.hpp"

namespace dualstab::hilbert {

using algebra::Index;
using algebra::Matrix;
using algebra::SpdFactorization;
using algebra::Vector;

class TruthSpace {
 public:
  TruthSpace(const Matrix& gramian, std::string label = "truth");

  Index dim() const noexcept { return factor_.dim(); }
  const Matrix& gramian() const noexcept { return factor_.matrix(); }
  const SpdFactorization& factor() const noexcept { return factor_; }
  const std::string& label() const noexcept { return label_; }

  /// ||x||_1
  double norm(const Vector& x) const;

 private:
  SpdFactorization factor_;
  std::string label_;
};

using TruthSpacePtr = std::shared_ptr<const TruthSpace>;

/// Column embedding E (N_T x N) of a subspace, with induced Gramian E^T G E.
class Subspace {
 public:
  /// Throws NotSpd when E is column rank deficient.
  Subspace(TruthSpacePtr parent, const Matrix& embedding);

  const TruthSpace& parent() const noexcept { return *parent_; }
  const TruthSpacePtr& parent_ptr() const noexcept { return parent_; }
  Index dim() const noexcept { return embedding_.cols(); }
  const Matrix& embedding() const noexcept { return embedding_; }
  const Matrix& gramian() const noexcept { return factor_.matrix(); }
  const SpdFactorization& factor() const noexcept { return factor_; }

  Vector embed(const Vector& coeffs) const { return embedding_ * coeffs; }

 private:
  TruthSpacePtr parent_;
  Matrix embedding_;
  SpdFactorization factor_;
};

/// Element of V' given by its action on the truth basis.
struct Functional {
  Vector action;
};

/// Column n is the action of the n-th biorthogonal dual basis functional.
struct DualBasis {
  Matrix reps;
};

/// Coefficients c of the G-orthogonal projection of x onto the subspace.
Vector orthogonal_project(const Subspace& sub, const Vector& x);

/// G^{-1} f
Vector riesz_rep(const TruthSpace& space, const Functional& f);

double dual_norm(const TruthSpace& space, const Functional& f);

/// G E G_sub^{-1}; satisfies reps^T E = I.
DualBasis dual_basis(const Subspace& sub);

/// Adjoint of the orthogonal projector: reps (E^T f).
Functional adjoint_project(const Subspace& sub, const Functional& f);

/// <f, E c>
double pairing(const Functional& f, const Subspace& sub, const Vector& c);

/// Gramian of the dual basis in the V' scalar product, reps^T G^{-1} reps.
Matrix dual_gramian(const Subspace& sub, const DualBasis& basis);

}  // namespace dualstab::hilbert
