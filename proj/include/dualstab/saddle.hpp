#pragma once

// Stabilized discretization of the saddle point problem
//
//   a(u, v) - b(p, v) + b(q, u) - gamma c(Au - Bp, Bq)
//       = <F, v> + <G, q> - gamma c(F, Bq)      for all (v, q) in U x Q,
//
// its three-field counterpart with the auxiliary unknown in W, static
// condensation between the two, and the constants certifying coercivity.

#include <cstdint>
#include <optional>

#include "dualstab/algebra.hpp"
#include "dualstab/dualprod.hpp"
#include "dualstab/hilbert.hpp"

namespace dualstab::saddle {

using algebra::Index;
using algebra::Matrix;
using algebra::SpdFactorization;
using algebra::Vector;
using hilbert::Functional;
using hilbert::Subspace;
using hilbert::TruthSpace;
using hilbert::TruthSpacePtr;

/// Finer pressure space the discrete pressures are compared in: `prolong`
/// maps Q coefficients into it and `mass` is its Gramian.
struct PressureReference {
  Matrix prolong;
  Matrix mass;
};

class SaddleProblem {
 public:
  /// a_truth: a(v_j, v_i); b_truth: b(psi_l, v_i); q_gram: pressure Gramian;
  /// g_rhs: <G, psi_l>. Throws PreconditionViolated unless a is coercive.
  SaddleProblem(TruthSpacePtr truth, Matrix a_truth, Matrix b_truth, Matrix q_gram,
                Functional f, Vector g_rhs, std::optional<PressureReference> reference = {});

  const TruthSpace& truth() const noexcept { return *truth_; }
  const TruthSpacePtr& truth_ptr() const noexcept { return truth_; }
  const Matrix& a_truth() const noexcept { return a_truth_; }
  const Matrix& b_truth() const noexcept { return b_truth_; }
  const SpdFactorization& q_gram() const noexcept { return q_gram_; }
  const Functional& f() const noexcept { return f_; }
  const Vector& g_rhs() const noexcept { return g_rhs_; }
  const dualprod::PressureDeflation& deflation() const noexcept { return deflation_; }
  Index pressure_dim() const noexcept { return b_truth_.cols(); }

  /// Reference pressure space; defaults to Q itself.
  const Matrix& pressure_prolong() const noexcept { return prolong_; }
  const SpdFactorization& pressure_mass() const noexcept { return mass_; }

  /// Coercivity of a in the V norm.
  double alpha() const noexcept { return alpha_; }
  double norm_A() const noexcept { return norm_A_; }
  /// Truth inf-sup constant and ||B|| on the deflated pressures.
  double beta() const { return deflation_.beta(); }
  double norm_B() const { return deflation_.norm_B(); }

  /// Same problem with new data (F, G); used for consistency checks.
  SaddleProblem with_data(Functional f, Vector g_rhs) const;

 private:
  TruthSpacePtr truth_;
  Matrix a_truth_;
  Matrix b_truth_;
  SpdFactorization q_gram_;
  Functional f_;
  Vector g_rhs_;
  Matrix prolong_;
  SpdFactorization mass_;
  dualprod::PressureDeflation deflation_;
  double alpha_ = 0.0;
  double norm_A_ = 0.0;
};

/// Velocity space U, auxiliary space W (inside the dual product) and gamma.
class Discretization {
 public:
  Discretization(Subspace u, dualprod::DualProduct dp, double gamma);

  const Subspace& U() const noexcept { return u_; }
  const Subspace& W() const noexcept { return dp_.aux(); }
  const dualprod::DualProduct& dp() const noexcept { return dp_; }
  double gamma() const noexcept { return gamma_; }

  Discretization with_gamma(double gamma) const { return {u_, dp_, gamma}; }

 private:
  Subspace u_;
  dualprod::DualProduct dp_;
  double gamma_;
};

struct StabilizedSystem {
  Matrix K;
  Vector rhs;
  Matrix a_uu, b_uq, a_wu, b_wq;
  /// Columns spanning the admissible (deflated) pressures.
  Matrix pressure_basis;

  Index nu() const { return a_uu.rows(); }
  Index nq() const { return b_uq.cols(); }
};

struct ThreeFieldSystem {
  Matrix M;  // unknown order (x, z, y)
  Vector rhs;
  Index nu = 0, nw = 0, nq = 0;
  double gamma = 0.0;
  SpdFactorization s;
  Matrix pressure_basis;
};

StabilizedSystem assemble_stabilized(const SaddleProblem& pb, const Discretization& d);
/// Throws GammaZero for gamma <= 0.
ThreeFieldSystem assemble_three_field(const SaddleProblem& pb, const Discretization& d);
/// Eliminates the auxiliary block.
StabilizedSystem static_condense(const ThreeFieldSystem& tf);
/// z = gamma S^{-1} (F_W - A_WU x + B_WQ y), the eliminated unknown.
Vector recover_auxiliary(const ThreeFieldSystem& tf, const Vector& x, const Vector& y);

struct Solution {
  Vector u;
  Vector w;  // empty for the condensed system
  Vector p;
  /// ||K s - r|| / ||r|| on the deflated system.
  double residual = 0.0;
};

/// SingularSystem is raised when sigma_min <= kSingularTol * sigma_max.
inline constexpr double kSingularTol = 1e-12;

Vector solve_dense(const Matrix& k, const Vector& rhs, double* residual = nullptr);
Solution solve(const StabilizedSystem& sys);
Solution solve(const ThreeFieldSystem& sys);
/// sigma_min / sigma_max of the deflated stabilized matrix.
double deflated_singular_ratio(const StabilizedSystem& sys);

struct ConstantsReport {
  double alpha, norm_A, norm_B, beta;
  double c_hat, C_hat;
  double kappa_star, K_star, c_star, C_star;
  double alpha_hat, beta_hat;
  double gamma0, gamma_tilde0;
  double gamma, beta_gamma;

  /// min{g c*/2, alpha - g C*^2 ||A||^2 / (2 c*)} c_hat, 0 when c* = 0.
  double beta_gamma_at(double g) const;
};

ConstantsReport constants(const SaddleProblem& pb, const Discretization& d);

struct CoercivityCheck {
  double measured;
  double predicted;
};

/// Smallest eigenvalue of sym(K) against blockdiag(G_U, G_Q) on the deflated
/// pressures.
double measure_coercivity(const SaddleProblem& pb, const Discretization& d);
/// Requires gamma < gamma0 (or gamma = 0); throws BoundViolated when the
/// measured value falls below the predicted beta_gamma.
CoercivityCheck verify_coercivity(const SaddleProblem& pb, const Discretization& d);

struct RelaxedInfsup {
  double combined;  // sup over U + W
  double u_only;
  double w_only;
};

RelaxedInfsup verify_relaxed_infsup(const SaddleProblem& pb, const Discretization& d);

/// Exact solution: truth velocity coefficients and reference pressure
/// coefficients.
struct ExactPair {
  Vector u;
  Vector p;
};

struct ErrorNorms {
  double u;  // V norm
  double p;  // reference pressure norm, kernel removed
  double sum() const { return u + p; }
};

ErrorNorms solution_errors(const SaddleProblem& pb, const Discretization& d, const Solution& sol,
                           const ExactPair& exact);
/// Distances of the exact pair to U and Q.
ErrorNorms best_approximation(const SaddleProblem& pb, const Discretization& d,
                              const ExactPair& exact);

struct QuasiOptimality {
  ErrorNorms error;
  ErrorNorms best;
  double ratio;
};

/// Throws DegenerateDenominator when the exact pair lies in U x Q.
QuasiOptimality quasi_optimality(const SaddleProblem& pb, const Discretization& d,
                                 const ExactPair& exact);

}  // namespace dualstab::saddle
