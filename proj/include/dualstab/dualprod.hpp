#pragma once

// Computable surrogate for the V' scalar product.
//
// Given an auxiliary subspace W (embedding E) and an SPD matrix S on W, the
// form c(f, g) = (E^T f)^T S^{-1} (E^T g) is spectrally equivalent to the
// exact dual product on the image of the adjoint projector. This header also
// hosts the estimators for every constant that governs that equivalence and
// the inf-sup quantities used to choose W.

#include <cstdint>
#include <string>
#include <string_view>

#include "dualstab/algebra.hpp"
#include "dualstab/hilbert.hpp"

namespace dualstab::dualprod {

using algebra::Index;
using algebra::Matrix;
using algebra::SpdFactorization;
using algebra::Vector;
using hilbert::Functional;
using hilbert::Subspace;
using hilbert::TruthSpace;

enum class StiffnessKind { gramian, scaled_gramian, lumped_diagonal };

struct StiffnessChoice {
  StiffnessKind kind = StiffnessKind::gramian;
  double sigma = 1.0;  // scaled_gramian only

  /// Accepts "gramian", "scaled:<sigma>" and "lumped".
  static StiffnessChoice parse(std::string_view text);
  std::string to_string() const;
};

/// SPD matrix S on W with the extreme eigenvalues kappa_star, K_star of the
/// pencil (S, G_W).
class StiffnessForm {
 public:
  StiffnessForm(const Subspace& sub, const Matrix& s);

  const Matrix& matrix() const noexcept { return factor_.matrix(); }
  const SpdFactorization& factor() const noexcept { return factor_; }
  double kappa_star() const noexcept { return kappa_star_; }
  double K_star() const noexcept { return K_star_; }

 private:
  SpdFactorization factor_;
  double kappa_star_;
  double K_star_;
};

/// lumped_diagonal uses the absolute row sums of G_W; throws NotSpd when one
/// of them is not positive.
StiffnessForm make_stiffness(const Subspace& sub, StiffnessChoice choice);

class DualProduct {
 public:
  DualProduct(Subspace aux, StiffnessForm stiffness);

  const Subspace& aux() const noexcept { return aux_; }
  const StiffnessForm& stiffness() const noexcept { return stiffness_; }

  /// E^T f: the moments of f against the W basis.
  Vector moments(const Functional& f) const;
  Matrix moments(const Matrix& actions) const;

 private:
  Subspace aux_;
  StiffnessForm stiffness_;
};

double c_apply(const DualProduct& dp, const Functional& f, const Functional& g);
/// Matrix of c over two families of functionals given column-wise.
Matrix c_matrix(const DualProduct& dp, const Matrix& f_actions, const Matrix& g_actions);

struct Interval {
  double lower;
  double upper;
};

/// Extreme eigenvalues of the S^{-1} form against the exact dual Gramian of
/// the dual basis. Expected inside [1/K_star, 1/kappa_star].
Interval measure_dual_equivalence(const DualProduct& dp);
Interval verify_dual_equivalence(const DualProduct& dp);

/// max ||S w||_{-1} / ||w||_1 over W. Expected <= K_star.
double measure_stiffness_boundedness(const DualProduct& dp);
double verify_stiffness_boundedness(const DualProduct& dp);

/// Restriction of a pressure space to the Q_gram-orthogonal complement of the
/// kernel of B. Columns of `basis` are Q_gram-orthonormal and diagonalize the
/// truth dual Gramian B^T G^{-1} B with eigenvalues `dual_eigs` (ascending).
struct PressureDeflation {
  Matrix basis;
  Vector dual_eigs;
  Matrix kernel;

  Index dim() const noexcept { return basis.cols(); }
  /// Truth inf-sup constant on the deflated space.
  double beta() const;
  /// ||B|| from Q (Q_gram norm) to V' (truth dual norm).
  double norm_B() const;
};

/// Eigenvalues <= kKernelTol * max are treated as kernel.
inline constexpr double kKernelTol = 1e-10;

PressureDeflation deflate_pressure(const TruthSpace& truth, const Matrix& b_truth,
                                   const SpdFactorization& q_gram);

/// B^T G^{-1} B
Matrix truth_dual_gramian(const TruthSpace& truth, const Matrix& b_truth);

/// Largest c with c(Bq, Bq) >= c ||Bq||_{-1}^2 over the deflated pressures.
double estimate_cstar(const DualProduct& dp, const Matrix& b_truth,
                      const SpdFactorization& q_gram);
double estimate_cstar(const DualProduct& dp, const Matrix& b_truth,
                      const PressureDeflation& defl);

/// inf_q sup_{w in W} b(q, w) / (|||q||| ||w||_1).
double infsup_QW(const Matrix& b_truth, const SpdFactorization& q_gram, const Subspace& sub);
double infsup_QW(const Matrix& b_truth, const PressureDeflation& defl, const Subspace& sub);

/// Same inf-sup over the span of arbitrary truth columns (rank-revealing, so
/// the columns may be linearly dependent or empty).
double infsup_over_span(const TruthSpace& truth, const Matrix& b_truth,
                        const PressureDeflation& defl, const Matrix& columns);

/// inf over theta in B(Q) of sup_{w in W} <theta, w> / (||theta||_{-1} ||w||_1).
double dual_infsup(const Matrix& b_truth, const PressureDeflation& defl, const Subspace& sub);

/// The two implications linking c_star and the dual inf-sup alpha_hat.
struct AuxiliaryInfsupReport {
  double c_star;
  double alpha_hat;
  double kappa_star;
  double K_star;
  double alpha_hat_bound;  // sqrt(c_star kappa_star)
  double c_star_bound;     // alpha_hat^2 / K_star
  bool alpha_ok;
  bool c_star_ok;
  bool ok() const { return alpha_ok && c_star_ok; }
};

inline constexpr double kChainTol = 1e-8;

AuxiliaryInfsupReport measure_auxiliary_infsup(const DualProduct& dp, const Matrix& b_truth,
                                               const SpdFactorization& q_gram);
AuxiliaryInfsupReport verify_auxiliary_infsup(const DualProduct& dp, const Matrix& b_truth,
                                              const SpdFactorization& q_gram);

/// ||B||^{-1} beta_hat <= alpha_hat <= beta^{-1} beta_hat together with the
/// sampled two-sided bound beta |||q||| <= ||Bq||_{-1} <= ||B|| |||q|||.
struct InfsupSandwichReport {
  double beta;
  double norm_B;
  double beta_hat;
  double alpha_hat;
  double lower;  // beta_hat / norm_B
  double upper;  // beta_hat / beta
  double sampled_min_ratio;  // min ||Bq||_{-1} / |||q|||
  double sampled_max_ratio;
  int samples;
  bool sandwich_ok;
  bool bound_ok;
  bool ok() const { return sandwich_ok && bound_ok; }
};

InfsupSandwichReport measure_infsup_sandwich(const Matrix& b_truth, const SpdFactorization& q_gram,
                                             const Subspace& sub, std::uint64_t seed,
                                             int samples = 100);
InfsupSandwichReport verify_infsup_sandwich(const Matrix& b_truth, const SpdFactorization& q_gram,
                                            const Subspace& sub, std::uint64_t seed,
                                            int samples = 100);

struct EquivalenceReport {
  double kappa_star;
  double K_star;
  double c_star;
  double C_star;
  double alpha_hat;
  double beta_hat;
  double beta;
  double norm_B;
};

EquivalenceReport equivalence_report(const DualProduct& dp, const Matrix& b_truth,
                                     const SpdFactorization& q_gram);

/// lhs >= rhs up to tol * max(1, |rhs|)
bool geq_tol(double lhs, double rhs, double tol);

}  // namespace dualstab::dualprod
