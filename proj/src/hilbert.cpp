#include "dualstab/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dualstab::hilbert {

namespace {

void require_truth_length(const TruthSpace& space, Index n, const char* what) {
  if (n != space.dim()) {
    throw DimensionMismatch(std::string(what) + ": vector of length " + std::to_string(n) +
                            " on a " + std::to_string(space.dim()) + "-dimensional truth space");
  }
}

}  // namespace

TruthSpace::TruthSpace(const Matrix& gramian, std::string label)
    : factor_(gramian), label_(std::move(label)) {}

double TruthSpace::norm(const Vector& x) const {
  require_truth_length(*this, x.size(), "norm");
  return std::sqrt(std::max(x.dot(gramian() * x), 0.0));
}

Subspace::Subspace(TruthSpacePtr parent, const Matrix& embedding)
    : parent_(std::move(parent)),
      embedding_(embedding),
      factor_([&] {
        if (!parent_) throw DimensionMismatch("Subspace: null parent space");
        if (embedding.rows() != parent_->dim() || embedding.cols() == 0 ||
            embedding.cols() > parent_->dim()) {
          throw DimensionMismatch("Subspace: embedding is " + std::to_string(embedding.rows()) +
                                  "x" + std::to_string(embedding.cols()) + " for a " +
                                  std::to_string(parent_->dim()) + "-dimensional truth space");
        }
        return algebra::sym_part(embedding.transpose() * parent_->gramian() * embedding);
      }()) {}

Vector orthogonal_project(const Subspace& sub, const Vector& x) {
  require_truth_length(sub.parent(), x.size(), "orthogonal_project");
  return sub.factor().solve(Vector(sub.embedding().transpose() * (sub.parent().gramian() * x)));
}

Vector riesz_rep(const TruthSpace& space, const Functional& f) {
  require_truth_length(space, f.action.size(), "riesz_rep");
  return space.factor().solve(f.action);
}

double dual_norm(const TruthSpace& space, const Functional& f) {
  const Vector r = riesz_rep(space, f);
  return std::sqrt(std::max(f.action.dot(r), 0.0));
}

DualBasis dual_basis(const Subspace& sub) {
  const Matrix ge = sub.parent().gramian() * sub.embedding();
  // G E G_sub^{-1} = (G_sub^{-1} E^T G)^T
  return {Matrix(sub.factor().solve(Matrix(ge.transpose())).transpose())};
}

Functional adjoint_project(const Subspace& sub, const Functional& f) {
  require_truth_length(sub.parent(), f.action.size(), "adjoint_project");
  const Vector moments = sub.embedding().transpose() * f.action;
  return {dual_basis(sub).reps * moments};
}

double pairing(const Functional& f, const Subspace& sub, const Vector& c) {
  require_truth_length(sub.parent(), f.action.size(), "pairing");
  if (c.size() != sub.dim()) throw DimensionMismatch("pairing: coefficient length differs");
  return f.action.dot(sub.embed(c));
}

Matrix dual_gramian(const Subspace& sub, const DualBasis& basis) {
  return algebra::sym_part(basis.reps.transpose() * sub.parent().factor().solve(basis.reps));
}

}  // namespace dualstab::hilbert
