#include "dualstab/dualprod.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

namespace dualstab::dualprod {

namespace {

double safe_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }

double rel_scale(double x) { return std::max(1.0, std::abs(x)); }

void require_pressure_rows(const Matrix& b_truth, const TruthSpace& truth, Index q_dim) {
  if (b_truth.rows() != truth.dim() || b_truth.cols() != q_dim) {
    throw DimensionMismatch("B is " + std::to_string(b_truth.rows()) + "x" +
                            std::to_string(b_truth.cols()) + ", expected " +
                            std::to_string(truth.dim()) + "x" + std::to_string(q_dim));
  }
}

// Smallest eigenvalue of Z^T M Z against the diagonal metric diag(weights).
double min_deflated_eig(const Matrix& m, const PressureDeflation& defl, const Vector& weights) {
  if (defl.dim() == 0) throw DegeneratePencil("deflated pressure space is empty");
  const Matrix mz = defl.basis.transpose() * m * defl.basis;
  const Vector inv_sqrt = weights.cwiseSqrt().cwiseInverse();
  const Matrix scaled = inv_sqrt.asDiagonal() * mz * inv_sqrt.asDiagonal();
  return algebra::sym_eig(scaled).min();
}

// B_W^T X^{-1} B_W for the moments B_W = E^T B and an SPD X on W.
Matrix moment_form(const Matrix& b_w, const SpdFactorization& x) {
  return algebra::sym_part(b_w.transpose() * x.solve(b_w));
}

}  // namespace

bool geq_tol(double lhs, double rhs, double tol) { return lhs >= rhs - tol * rel_scale(rhs); }

StiffnessChoice StiffnessChoice::parse(std::string_view text) {
  if (text == "gramian") return {StiffnessKind::gramian, 1.0};
  if (text == "lumped") return {StiffnessKind::lumped_diagonal, 1.0};
  constexpr std::string_view prefix = "scaled:";
  if (text.starts_with(prefix)) {
    const std::string value(text.substr(prefix.size()));
    std::size_t used = 0;
    double sigma = 0.0;
    try {
      sigma = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty() || !(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ConfigError("s", "scale factor must be a positive real, got '" + value + "'");
    }
    return {StiffnessKind::scaled_gramian, sigma};
  }
  throw ConfigError("s", "expected gramian, scaled:<sigma> or lumped, got '" +
                             std::string(text) + "'");
}

std::string StiffnessChoice::to_string() const {
  switch (kind) {
    case StiffnessKind::gramian:
      return "gramian";
    case StiffnessKind::lumped_diagonal:
      return "lumped";
    case StiffnessKind::scaled_gramian: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "scaled:%.17g", sigma);
      return buf;
    }
  }
  return "gramian";
}

StiffnessForm::StiffnessForm(const Subspace& sub, const Matrix& s) : factor_(s) {
  if (s.rows() != sub.dim()) {
    throw DimensionMismatch("StiffnessForm: S is " + std::to_string(s.rows()) +
                            "-dimensional, W is " + std::to_string(sub.dim()));
  }
  const algebra::EigResult eig = algebra::sym_generalized_eig(s, sub.factor());
  kappa_star_ = eig.min();
  K_star_ = eig.max();
}

StiffnessForm make_stiffness(const Subspace& sub, StiffnessChoice choice) {
  const Matrix& g = sub.gramian();
  switch (choice.kind) {
    case StiffnessKind::gramian:
      return StiffnessForm(sub, g);
    case StiffnessKind::scaled_gramian:
      if (!(choice.sigma > 0.0)) throw NotSpd("scaled stiffness needs sigma > 0");
      return StiffnessForm(sub, choice.sigma * g);
    case StiffnessKind::lumped_diagonal: {
      const Vector sums = g.cwiseAbs().rowwise().sum();
      for (Index i = 0; i < sums.size(); ++i) {
        if (!(sums(i) > 0.0)) {
          throw NotSpd("lumped stiffness: row " + std::to_string(i) + " sums to " +
                       std::to_string(sums(i)));
        }
      }
      return StiffnessForm(sub, Matrix(sums.asDiagonal()));
    }
  }
  throw NotSpd("unknown stiffness choice");
}

DualProduct::DualProduct(Subspace aux, StiffnessForm stiffness)
    : aux_(std::move(aux)), stiffness_(std::move(stiffness)) {
  if (stiffness_.factor().dim() != aux_.dim()) {
    throw DimensionMismatch("DualProduct: S and W dimensions differ");
  }
}

Vector DualProduct::moments(const Functional& f) const {
  if (f.action.size() != aux_.parent().dim()) {
    throw DimensionMismatch("moments: functional length differs from truth dimension");
  }
  return aux_.embedding().transpose() * f.action;
}

Matrix DualProduct::moments(const Matrix& actions) const {
  if (actions.rows() != aux_.parent().dim()) {
    throw DimensionMismatch("moments: functional length differs from truth dimension");
  }
  return aux_.embedding().transpose() * actions;
}

double c_apply(const DualProduct& dp, const Functional& f, const Functional& g) {
  const Vector mf = dp.moments(f);
  const Vector mg = dp.moments(g);
  return mf.dot(dp.stiffness().factor().solve(mg));
}

Matrix c_matrix(const DualProduct& dp, const Matrix& f_actions, const Matrix& g_actions) {
  const Matrix mf = dp.moments(f_actions);
  const Matrix mg = dp.moments(g_actions);
  return mf.transpose() * dp.stiffness().factor().solve(mg);
}

Interval measure_dual_equivalence(const DualProduct& dp) {
  const Matrix dual = hilbert::dual_gramian(dp.aux(), hilbert::dual_basis(dp.aux()));
  const Matrix s_inv = dp.stiffness().factor().inverse();
  const algebra::EigResult eig = algebra::sym_generalized_eig(s_inv, algebra::cholesky(dual));
  return {eig.min(), eig.max()};
}

Interval verify_dual_equivalence(const DualProduct& dp) {
  const Interval iv = measure_dual_equivalence(dp);
  const double lo = 1.0 / dp.stiffness().K_star();
  const double hi = 1.0 / dp.stiffness().kappa_star();
  if (!geq_tol(iv.lower, lo, 1e-9)) throw BoundViolated("dual equivalence lower", iv.lower, lo);
  if (!geq_tol(hi, iv.upper, 1e-9)) throw BoundViolated("dual equivalence upper", iv.upper, hi);
  return iv;
}

double measure_stiffness_boundedness(const DualProduct& dp) {
  // S w as a functional is reps S c, so ||S w||_{-1}^2 = c^T S D S c with D
  // the dual Gramian of the biorthogonal basis.
  const Matrix dual = hilbert::dual_gramian(dp.aux(), hilbert::dual_basis(dp.aux()));
  const Matrix& s = dp.stiffness().matrix();
  const Matrix form = algebra::sym_part(s * dual * s);
  return safe_sqrt(algebra::sym_generalized_eig(form, dp.aux().factor()).max());
}

double verify_stiffness_boundedness(const DualProduct& dp) {
  const double v = measure_stiffness_boundedness(dp);
  const double bound = dp.stiffness().K_star();
  if (!geq_tol(bound, v, 1e-9)) throw BoundViolated("stiffness boundedness", v, bound);
  return v;
}

double PressureDeflation::beta() const {
  if (dim() == 0) throw DegeneratePencil("deflated pressure space is empty");
  return safe_sqrt(dual_eigs(0));
}

double PressureDeflation::norm_B() const {
  if (dim() == 0) return 0.0;
  return safe_sqrt(dual_eigs(dual_eigs.size() - 1));
}

Matrix truth_dual_gramian(const TruthSpace& truth, const Matrix& b_truth) {
  return algebra::sym_part(b_truth.transpose() * truth.factor().solve(b_truth));
}

PressureDeflation deflate_pressure(const TruthSpace& truth, const Matrix& b_truth,
                                   const SpdFactorization& q_gram) {
  require_pressure_rows(b_truth, truth, q_gram.dim());
  const algebra::EigResult eig =
      algebra::sym_generalized_eig(truth_dual_gramian(truth, b_truth), q_gram);
  const double top = std::max(eig.max(), 0.0);
  Index first = 0;
  while (first < eig.values.size() && !(eig.values(first) > kKernelTol * top)) ++first;
  PressureDeflation d;
  d.kernel = eig.vectors.leftCols(first);
  d.basis = eig.vectors.rightCols(eig.values.size() - first);
  d.dual_eigs = eig.values.tail(eig.values.size() - first);
  return d;
}

double estimate_cstar(const DualProduct& dp, const Matrix& b_truth,
                      const PressureDeflation& defl) {
  const Matrix b_w = dp.moments(b_truth);
  return std::max(min_deflated_eig(moment_form(b_w, dp.stiffness().factor()), defl, defl.dual_eigs),
                  0.0);
}

double estimate_cstar(const DualProduct& dp, const Matrix& b_truth,
                      const SpdFactorization& q_gram) {
  return estimate_cstar(dp, b_truth, deflate_pressure(dp.aux().parent(), b_truth, q_gram));
}

double infsup_QW(const Matrix& b_truth, const PressureDeflation& defl, const Subspace& sub) {
  const Matrix b_w = sub.embedding().transpose() * b_truth;
  const Vector ones = Vector::Ones(defl.dim());
  return safe_sqrt(min_deflated_eig(moment_form(b_w, sub.factor()), defl, ones));
}

double infsup_QW(const Matrix& b_truth, const SpdFactorization& q_gram, const Subspace& sub) {
  return infsup_QW(b_truth, deflate_pressure(sub.parent(), b_truth, q_gram), sub);
}

double infsup_over_span(const TruthSpace& truth, const Matrix& b_truth,
                        const PressureDeflation& defl, const Matrix& columns) {
  if (defl.dim() == 0) throw DegeneratePencil("deflated pressure space is empty");
  if (columns.cols() == 0) return 0.0;
  if (columns.rows() != truth.dim()) throw DimensionMismatch("infsup_over_span: column length");
  // G-orthonormal basis of the span, dropping dependent directions.
  const Matrix gram = algebra::sym_part(columns.transpose() * truth.gramian() * columns);
  const algebra::EigResult eig = algebra::sym_eig(gram);
  const double top = eig.max();
  if (!(top > 0.0)) return 0.0;
  std::vector<Index> keep;
  for (Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) > 1e-12 * top) keep.push_back(i);
  }
  Matrix ortho(columns.rows(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    ortho.col(static_cast<Index>(k)) =
        columns * eig.vectors.col(keep[k]) / std::sqrt(eig.values(keep[k]));
  }
  const Matrix moments = ortho.transpose() * b_truth;
  const Matrix form = algebra::sym_part(moments.transpose() * moments);
  return safe_sqrt(min_deflated_eig(form, defl, Vector::Ones(defl.dim())));
}

double dual_infsup(const Matrix& b_truth, const PressureDeflation& defl, const Subspace& sub) {
  const Matrix b_w = sub.embedding().transpose() * b_truth;
  return safe_sqrt(min_deflated_eig(moment_form(b_w, sub.factor()), defl, defl.dual_eigs));
}

AuxiliaryInfsupReport measure_auxiliary_infsup(const DualProduct& dp, const Matrix& b_truth,
                                               const SpdFactorization& q_gram) {
  const PressureDeflation defl = deflate_pressure(dp.aux().parent(), b_truth, q_gram);
  AuxiliaryInfsupReport r{};
  r.kappa_star = dp.stiffness().kappa_star();
  r.K_star = dp.stiffness().K_star();
  r.c_star = estimate_cstar(dp, b_truth, defl);
  r.alpha_hat = dual_infsup(b_truth, defl, dp.aux());
  r.alpha_hat_bound = safe_sqrt(r.c_star * r.kappa_star);
  r.c_star_bound = r.alpha_hat * r.alpha_hat / r.K_star;
  r.alpha_ok = geq_tol(r.alpha_hat, r.alpha_hat_bound, kChainTol);
  r.c_star_ok = geq_tol(r.c_star, r.c_star_bound, kChainTol);
  return r;
}

AuxiliaryInfsupReport verify_auxiliary_infsup(const DualProduct& dp, const Matrix& b_truth,
                                              const SpdFactorization& q_gram) {
  const AuxiliaryInfsupReport r = measure_auxiliary_infsup(dp, b_truth, q_gram);
  if (!r.alpha_ok) throw BoundViolated("alpha_hat >= sqrt(c_star kappa_star)", r.alpha_hat, r.alpha_hat_bound);
  if (!r.c_star_ok) throw BoundViolated("c_star >= alpha_hat^2 / K_star", r.c_star, r.c_star_bound);
  return r;
}

InfsupSandwichReport measure_infsup_sandwich(const Matrix& b_truth, const SpdFactorization& q_gram,
                                             const Subspace& sub, std::uint64_t seed,
                                             int samples) {
  const TruthSpace& truth = sub.parent();
  const PressureDeflation defl = deflate_pressure(truth, b_truth, q_gram);
  InfsupSandwichReport r{};
  r.beta = defl.beta();
  r.norm_B = defl.norm_B();
  r.beta_hat = infsup_QW(b_truth, defl, sub);
  r.alpha_hat = dual_infsup(b_truth, defl, sub);
  r.lower = r.beta_hat / r.norm_B;
  r.upper = r.beta_hat / r.beta;
  r.sandwich_ok = geq_tol(r.alpha_hat, r.lower, kChainTol) && geq_tol(r.upper, r.alpha_hat, kChainTol);

  // Random pressures with the kernel component removed; norms evaluated
  // directly rather than through the deflation eigenvalues.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  r.samples = samples;
  r.sampled_min_ratio = std::numeric_limits<double>::infinity();
  r.sampled_max_ratio = 0.0;
  const Matrix& gq = q_gram.matrix();
  for (int s = 0; s < samples; ++s) {
    Vector q(gq.rows());
    for (Index i = 0; i < q.size(); ++i) q(i) = normal(rng);
    if (defl.kernel.cols() > 0) q -= defl.kernel * (defl.kernel.transpose() * (gq * q));
    const double qn = std::sqrt(q.dot(gq * q));
    if (!(qn > 0.0)) continue;
    const double bq = hilbert::dual_norm(truth, {b_truth * q});
    r.sampled_min_ratio = std::min(r.sampled_min_ratio, bq / qn);
    r.sampled_max_ratio = std::max(r.sampled_max_ratio, bq / qn);
  }
  r.bound_ok = geq_tol(r.sampled_min_ratio, r.beta, kChainTol) &&
               geq_tol(r.norm_B, r.sampled_max_ratio, kChainTol);
  return r;
}

InfsupSandwichReport verify_infsup_sandwich(const Matrix& b_truth, const SpdFactorization& q_gram,
                                            const Subspace& sub, std::uint64_t seed, int samples) {
  const InfsupSandwichReport r = measure_infsup_sandwich(b_truth, q_gram, sub, seed, samples);
  if (!geq_tol(r.alpha_hat, r.lower, kChainTol)) {
    throw BoundViolated("alpha_hat >= beta_hat / ||B||", r.alpha_hat, r.lower);
  }
  if (!geq_tol(r.upper, r.alpha_hat, kChainTol)) {
    throw BoundViolated("alpha_hat <= beta_hat / beta", r.alpha_hat, r.upper);
  }
  if (!geq_tol(r.sampled_min_ratio, r.beta, kChainTol)) {
    throw BoundViolated("||Bq||_{-1} >= beta |||q|||", r.sampled_min_ratio, r.beta);
  }
  if (!geq_tol(r.norm_B, r.sampled_max_ratio, kChainTol)) {
    throw BoundViolated("||Bq||_{-1} <= ||B|| |||q|||", r.sampled_max_ratio, r.norm_B);
  }
  return r;
}

EquivalenceReport equivalence_report(const DualProduct& dp, const Matrix& b_truth,
                                     const SpdFactorization& q_gram) {
  const PressureDeflation defl = deflate_pressure(dp.aux().parent(), b_truth, q_gram);
  EquivalenceReport r{};
  r.kappa_star = dp.stiffness().kappa_star();
  r.K_star = dp.stiffness().K_star();
  r.c_star = estimate_cstar(dp, b_truth, defl);
  r.C_star = 1.0 / r.kappa_star;
  r.alpha_hat = dual_infsup(b_truth, defl, dp.aux());
  r.beta_hat = infsup_QW(b_truth, defl, dp.aux());
  r.beta = defl.beta();
  r.norm_B = defl.norm_B();
  return r;
}

}  // namespace dualstab::dualprod
