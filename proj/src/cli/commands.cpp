#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dualstab/cli.hpp"
#include "dualstab/errors.hpp"

namespace dualstab::cli {

namespace {

using algebra::Matrix;
using algebra::Vector;

constexpr double kResidualTol = 1e-10;
constexpr double kCondenseTol = 1e-12;
constexpr double kAgreeTol = 1e-9;
constexpr double kCheckTol = 1e-9;

struct Level {
  models::ModelConfig mc;
  saddle::SaddleProblem pb;
  saddle::Discretization d;
};

Level make_level(const RunConfig& cfg, int coarse) {
  models::ModelConfig mc = cfg.at_level(coarse);
  saddle::SaddleProblem pb = models::build_truth(mc);
  saddle::Discretization d = models::build_spaces(mc, pb);
  return {mc, std::move(pb), std::move(d)};
}

Report start(const RunConfig& cfg, std::vector<std::string> columns) {
  Report r;
  r.command = cfg.command;
  r.config = cfg.echo();
  r.seed = cfg.seed;
  r.columns = std::move(columns);
  return r;
}

const std::vector<std::string> kCheckColumns = {"level", "check", "measured", "bound", "relation",
                                                "pass"};

// relation: "<=", ">=" or "info"
void add_check(Report& r, long long level, const std::string& name, double measured,
               double bound, const std::string& relation, double tol = kCheckTol) {
  bool pass = true;
  if (relation == ">=") {
    pass = std::isfinite(measured) && dualprod::geq_tol(measured, bound, tol);
  } else if (relation == "<=") {
    pass = std::isfinite(measured) && dualprod::geq_tol(bound, measured, tol);
  }
  r.rows.push_back({level, name, measured, bound, relation, pass});
  r.verdict = r.verdict && pass;
}

void add_failure(Report& r, long long level, const std::string& name, double measured,
                 const std::string& relation) {
  r.rows.push_back({level, name, measured, std::monostate{}, relation, false});
  r.verdict = false;
}

double rel_diff(const Vector& a, const Vector& b) {
  const double scale = std::max({1.0, a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>()});
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

// L2 projection of a reference pressure onto Q.
Vector project_pressure(const saddle::SaddleProblem& pb, const Vector& p_ref) {
  const Matrix& r = pb.pressure_prolong();
  const Matrix mr = pb.pressure_mass().matrix() * r;
  return algebra::cholesky(algebra::sym_part(r.transpose() * mr)).solve(Vector(mr.transpose() * p_ref));
}

}  // namespace

Report cmd_constants(const RunConfig& cfg) {
  Report r = start(cfg, {"coarse_elems", "alpha", "norm_A", "norm_B", "beta", "kappa_star",
                         "K_star", "c_star", "C_star", "beta_hat", "gamma0", "gamma_tilde0",
                         "gamma", "beta_gamma"});
  for (int level : cfg.resolved_levels()) {
    const Level lv = make_level(cfg, level);
    const saddle::ConstantsReport c = saddle::constants(lv.pb, lv.d);
    r.rows.push_back({static_cast<long long>(level), c.alpha, c.norm_A, c.norm_B, c.beta,
                      c.kappa_star, c.K_star, c.c_star, c.C_star, c.beta_hat, c.gamma0,
                      c.gamma_tilde0, c.gamma, c.beta_gamma});
    const bool sane = c.alpha > 0.0 && c.kappa_star > 0.0 && c.K_star >= c.kappa_star &&
                      c.c_star >= -kCheckTol && std::isfinite(c.gamma0);
    r.verdict = r.verdict && sane;
  }
  return r;
}

Report cmd_spectral(const RunConfig& cfg) {
  Report r = start(cfg, kCheckColumns);
  for (int level : cfg.resolved_levels()) {
    const Level lv = make_level(cfg, level);
    const long long L = level;
    const dualprod::DualProduct& dp = lv.d.dp();
    const auto& st = dp.stiffness();

    const dualprod::Interval eq = dualprod::measure_dual_equivalence(dp);
    add_check(r, L, "dual_equivalence_lower", eq.lower, 1.0 / st.K_star(), ">=");
    add_check(r, L, "dual_equivalence_upper", eq.upper, 1.0 / st.kappa_star(), "<=");
    add_check(r, L, "stiffness_boundedness", dualprod::measure_stiffness_boundedness(dp),
              st.K_star(), "<=");

    const hilbert::Subspace& w = lv.d.W();
    const Matrix dg = hilbert::dual_gramian(w, hilbert::dual_basis(w));
    add_check(r, L, "dual_gramian_identity", algebra::max_rel_diff(dg, w.factor().inverse()), 1e-10,
              "<=", 0.0);

    const auto aux = dualprod::measure_auxiliary_infsup(dp, lv.pb.b_truth(), lv.pb.q_gram());
    add_check(r, L, "alpha_hat_from_c_star", aux.alpha_hat, aux.alpha_hat_bound, ">=",
              dualprod::kChainTol);
    add_check(r, L, "c_star_from_alpha_hat", aux.c_star, aux.c_star_bound, ">=",
              dualprod::kChainTol);

    const auto sw = dualprod::measure_infsup_sandwich(lv.pb.b_truth(), lv.pb.q_gram(), w, cfg.seed);
    add_check(r, L, "sandwich_lower", sw.alpha_hat, sw.lower, ">=", dualprod::kChainTol);
    add_check(r, L, "sandwich_upper", sw.alpha_hat, sw.upper, "<=", dualprod::kChainTol);
    add_check(r, L, "bound_B_lower", sw.sampled_min_ratio, sw.beta, ">=", dualprod::kChainTol);
    add_check(r, L, "bound_B_upper", sw.sampled_max_ratio, sw.norm_B, "<=", dualprod::kChainTol);

    const auto& defl = lv.pb.deflation();
    const Matrix& eu = lv.d.U().embedding();
    const Matrix& ew = w.embedding();
    Matrix both(eu.rows(), eu.cols() + ew.cols());
    both << eu, ew;
    const double combined = dualprod::infsup_over_span(lv.pb.truth(), lv.pb.b_truth(), defl, both);
    add_check(r, L, "relaxed_infsup_over_W", combined,
              dualprod::infsup_QW(lv.pb.b_truth(), defl, w), ">=");
    add_check(r, L, "relaxed_infsup_over_U", combined,
              dualprod::infsup_QW(lv.pb.b_truth(), defl, lv.d.U()), ">=");
  }
  return r;
}

Report cmd_infsup(const RunConfig& cfg) {
  Report r = start(cfg, {"level", "beta", "beta_hat_W", "beta_hat_U", "beta_hat_UW", "alpha_hat",
                         "pass"});
  for (int level : cfg.resolved_levels()) {
    const Level lv = make_level(cfg, level);
    const auto& defl = lv.pb.deflation();
    const Matrix& b = lv.pb.b_truth();
    const Matrix& eu = lv.d.U().embedding();
    const Matrix& ew = lv.d.W().embedding();
    Matrix both(eu.rows(), eu.cols() + ew.cols());
    both << eu, ew;
    const double bw = dualprod::infsup_QW(b, defl, lv.d.W());
    const double bu = dualprod::infsup_QW(b, defl, lv.d.U());
    const double buw = dualprod::infsup_over_span(lv.pb.truth(), b, defl, both);
    const double ah = dualprod::dual_infsup(b, defl, lv.d.W());
    const double beta = lv.pb.beta();
    // Discrete inf-sup values never exceed the truth one, and U + W dominates both.
    const bool pass = dualprod::geq_tol(beta, std::max(bw, bu), kCheckTol) &&
                      dualprod::geq_tol(buw, std::max(bw, bu), kCheckTol);
    r.rows.push_back({static_cast<long long>(level), beta, bw, bu, buw, ah, pass});
    r.verdict = r.verdict && pass;
  }
  return r;
}

Report cmd_solve(const RunConfig& cfg) {
  Report r = start(cfg, kCheckColumns);
  for (int level : cfg.resolved_levels()) {
    const Level lv = make_level(cfg, level);
    const long long L = level;
    const saddle::ExactPair exact = models::interpolate_exact(lv.mc);

    const saddle::StabilizedSystem sys = saddle::assemble_stabilized(lv.pb, lv.d);
    std::optional<saddle::Solution> sol;
    try {
      sol = saddle::solve(sys);
    } catch (const SingularSystem& e) {
      add_failure(r, L, "stabilized_singular", e.sigma_ratio(), "singular");
    }
    if (sol) {
      add_check(r, L, "stabilized_residual", sol->residual, kResidualTol, "<=", 0.0);
      const saddle::ErrorNorms err = models::error_norms(lv.pb, lv.d, *sol, exact);
      add_check(r, L, "u_error", err.u, 0.0, "info");
      add_check(r, L, "p_error", err.p, 0.0, "info");
    }

    if (lv.d.gamma() > 0.0) {
      const saddle::ThreeFieldSystem tf = saddle::assemble_three_field(lv.pb, lv.d);
      const saddle::StabilizedSystem cond = saddle::static_condense(tf);
      add_check(r, L, "condensation_matrix", algebra::max_rel_diff(cond.K, sys.K), kCondenseTol,
                "<=", 0.0);
      add_check(r, L, "condensation_rhs", algebra::max_rel_diff(cond.rhs, sys.rhs), kCondenseTol,
                "<=", 0.0);
      try {
        const saddle::Solution s3 = saddle::solve(tf);
        add_check(r, L, "three_field_residual", s3.residual, kResidualTol, "<=", 0.0);
        if (sol) {
          add_check(r, L, "route_agreement_u", rel_diff(s3.u, sol->u), kAgreeTol, "<=", 0.0);
          add_check(r, L, "route_agreement_p", rel_diff(s3.p, sol->p), kAgreeTol, "<=", 0.0);
        }
      } catch (const SingularSystem& e) {
        add_failure(r, L, "three_field_singular", e.sigma_ratio(), "singular");
      }
    }

    // Plain Galerkin (gamma = 0) on the same spaces: flagged when singular.
    const double ratio = saddle::deflated_singular_ratio(
        saddle::assemble_stabilized(lv.pb, lv.d.with_gamma(0.0)));
    r.rows.push_back({L, std::string("galerkin_singular_ratio"), ratio, saddle::kSingularTol,
                      std::string("info"), true});
    r.rows.push_back({L, std::string("galerkin_flagged_singular"),
                      ratio <= saddle::kSingularTol ? 1.0 : 0.0, std::monostate{},
                      std::string("info"), true});

    // Data manufactured from a discrete pair must be reproduced exactly.
    if (sol) {
      const Vector xs = hilbert::orthogonal_project(lv.d.U(), exact.u);
      const Vector ys = project_pressure(lv.pb, exact.p);
      const saddle::SaddleProblem pb2 = models::with_discrete_solution(lv.pb, lv.d, xs, ys);
      const saddle::Solution s2 = saddle::solve(saddle::assemble_stabilized(pb2, lv.d));
      const saddle::ExactPair discrete{lv.d.U().embed(xs), lv.pb.pressure_prolong() * ys};
      const saddle::ErrorNorms e2 = saddle::solution_errors(pb2, lv.d, s2, discrete);
      const double scale = 1.0 + lv.pb.truth().norm(discrete.u);
      add_check(r, L, "exact_reproduction", e2.sum() / scale, kAgreeTol, "<=", 0.0);
    }
  }
  return r;
}

Report cmd_converge(const RunConfig& cfg) {
  std::vector<std::string> cols = {"coarse_elems", "h",      "u_error", "p_error", "total_error",
                                   "rate",         "best_u", "best_p",  "ratio"};
  if (cfg.truth_check) cols.push_back("truth_check");
  Report r = start(cfg, cols);
  double prev = std::numeric_limits<double>::quiet_NaN();
  double min_rate = std::numeric_limits<double>::infinity();
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  bool truth_stable = true;
  const std::vector<int> levels = cfg.resolved_levels();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const Level lv = make_level(cfg, levels[i]);
    const saddle::ExactPair exact = models::interpolate_exact(lv.mc);
    const saddle::QuasiOptimality q = saddle::quasi_optimality(lv.pb, lv.d, exact);
    const double total = q.error.sum();
    Cell rate = std::monostate{};
    if (i > 0) {
      const double rt = std::log(prev / total) / std::log(static_cast<double>(levels[i]) / levels[i - 1]);
      rate = rt;
      min_rate = std::min(min_rate, rt);
    }
    prev = total;
    min_ratio = std::min(min_ratio, q.ratio);
    max_ratio = std::max(max_ratio, q.ratio);
    std::vector<Cell> row = {static_cast<long long>(levels[i]), 1.0 / levels[i], q.error.u,
                             q.error.p, total, rate, q.best.u, q.best.p, q.ratio};
    if (cfg.truth_check) {
      RunConfig fine = cfg;
      fine.model.truth_elems = cfg.model.truth_elems * 2;
      const Level lf = make_level(fine, levels[i]);
      const saddle::Solution s = saddle::solve(saddle::assemble_stabilized(lf.pb, lf.d));
      const double fine_total =
          models::error_norms(lf.pb, lf.d, s, models::interpolate_exact(lf.mc)).sum();
      row.push_back(fine_total);
      // Only meaningful once the truth mesh resolves the coarse one well.
      if (cfg.model.truth_elems >= 4 * levels[i]) {
        truth_stable = truth_stable && std::abs(fine_total - total) < 0.05 * total;
      }
    }
    r.rows.push_back(std::move(row));
  }
  if (levels.size() > 1) {
    r.verdict = min_rate >= 0.9 && max_ratio <= 2.0 * min_ratio;
  }
  r.verdict = r.verdict && truth_stable;
  return r;
}

Report cmd_condense_check(const RunConfig& cfg) {
  Report r = start(cfg, kCheckColumns);
  for (int level : cfg.resolved_levels()) {
    const Level lv = make_level(cfg, level);
    const long long L = level;
    for (double g : {0.01, 0.1, 1.0}) {
      const saddle::Discretization dg = lv.d.with_gamma(g);
      char buf[32];
      std::snprintf(buf, sizeof buf, "gamma=%g:", g);
      const std::string tag = buf;
      const saddle::ThreeFieldSystem tf = saddle::assemble_three_field(lv.pb, dg);
      const saddle::StabilizedSystem cond = saddle::static_condense(tf);
      const saddle::StabilizedSystem sys = saddle::assemble_stabilized(lv.pb, dg);
      add_check(r, L, tag + "condensation_matrix", algebra::max_rel_diff(cond.K, sys.K),
                kCondenseTol, "<=", 0.0);
      add_check(r, L, tag + "condensation_rhs", algebra::max_rel_diff(cond.rhs, sys.rhs),
                kCondenseTol, "<=", 0.0);
      try {
        const saddle::Solution sc = saddle::solve(cond);
        const saddle::Solution s3 = saddle::solve(tf);
        const Vector z = saddle::recover_auxiliary(tf, sc.u, sc.p);
        add_check(r, L, tag + "auxiliary_recovery", rel_diff(z, s3.w), kAgreeTol, "<=", 0.0);
        Vector full(tf.nu + tf.nw + tf.nq);
        full << sc.u, z, sc.p;
        const double rn = std::max(1.0, tf.rhs.norm());
        add_check(r, L, tag + "three_field_residual", (tf.M * full - tf.rhs).norm() / rn,
                  kResidualTol, "<=", 0.0);
      } catch (const SingularSystem& e) {
        add_failure(r, L, tag + "singular", e.sigma_ratio(), "singular");
      }
    }

    // With W equal to the whole truth space the auxiliary unknown vanishes.
    models::ModelConfig mx = lv.mc;
    mx.truth_elems = std::min(mx.truth_elems, 128);
    mx.coarse_elems = mx.truth_elems;
    mx.pressure = models::PressureKind::p0;
    mx.w = models::WChoice{models::WChoice::Kind::truth, 1};
    mx.gamma = models::GammaChoice{false, 0.0};
    const saddle::SaddleProblem pbx = models::build_truth(mx);
    const saddle::Discretization d0 = models::build_spaces(mx, pbx);
    const double g = 0.5 * saddle::constants(pbx, d0).gamma_tilde0;
    const saddle::Solution sx = saddle::solve(saddle::assemble_three_field(pbx, d0.with_gamma(g)));
    const double bound = kCheckTol * (1.0 + sx.u.lpNorm<1>());
    add_check(r, L, "maximal_space_auxiliary", sx.w.lpNorm<1>(), bound, "<=", 0.0);
  }
  return r;
}

Report run_command(const RunConfig& cfg) {
  if (cfg.command == "constants") return cmd_constants(cfg);
  if (cfg.command == "spectral") return cmd_spectral(cfg);
  if (cfg.command == "infsup") return cmd_infsup(cfg);
  if (cfg.command == "solve") return cmd_solve(cfg);
  if (cfg.command == "converge") return cmd_converge(cfg);
  if (cfg.command == "condense-check") return cmd_condense_check(cfg);
  throw ConfigError("command", "unknown command '" + cfg.command + "'");
}

}  // namespace dualstab::cli
