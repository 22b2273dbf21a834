#include "dualstab/models.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>

namespace dualstab::models {

namespace {

constexpr double pi = std::numbers::pi;

bool is_power_of_two(long n) { return n >= 1 && (n & (n - 1)) == 0; }

// 5-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::array<double, 5> nodes;
  std::array<double, 5> weights;
};

const GaussRule& gauss5() {
  static const GaussRule rule = [] {
    const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    return GaussRule{{-b, -a, 0.0, a, b}, {wb, wa, 128.0 / 225.0, wa, wb}};
  }();
  return rule;
}

// Integrates g over [x0, x1].
template <class F>
double integrate(double x0, double x1, F&& g) {
  const GaussRule& r = gauss5();
  const double mid = 0.5 * (x0 + x1);
  const double half = 0.5 * (x1 - x0);
  double sum = 0.0;
  for (int k = 0; k < 5; ++k) sum += r.weights[k] * g(mid + half * r.nodes[k]);
  return half * sum;
}

// Value at fine node i of the coarse hat centred at coarse node j.
double hat_weight(int i, int j, int ratio) {
  const double d = std::abs(static_cast<double>(i) - static_cast<double>(j) * ratio) / ratio;
  return std::max(0.0, 1.0 - d);
}

int ratio_of(int fine, int coarse) {
  if (coarse < 1 || fine % coarse != 0 || !is_power_of_two(fine / coarse)) {
    throw NestingViolated("mesh with " + std::to_string(coarse) + " elements is not nested in " +
                          std::to_string(fine));
  }
  return fine / coarse;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Mesh1D::Mesh1D(int n_elems) : n_elems_(n_elems) {
  if (n_elems < 2 || !is_power_of_two(n_elems)) {
    throw NestingViolated("mesh size must be a power of two >= 2, got " + std::to_string(n_elems));
  }
}

WChoice WChoice::parse(std::string_view text) {
  if (text == "truth") return {Kind::truth, 1};
  if (text == "same") return {Kind::same, 1};
  constexpr std::string_view prefix = "refined:";
  if (text.starts_with(prefix)) {
    const std::string value(text.substr(prefix.size()));
    int k = 0;
    std::size_t used = 0;
    try {
      k = std::stoi(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (value.empty() || used != value.size() || !is_power_of_two(k)) {
      throw ConfigError("w", "refinement factor must be a power of two, got '" + value + "'");
    }
    return {Kind::refined, k};
  }
  throw ConfigError("w", "expected refined:<k>, truth or same, got '" + std::string(text) + "'");
}

std::string WChoice::to_string() const {
  switch (kind) {
    case Kind::truth:
      return "truth";
    case Kind::same:
      return "same";
    case Kind::refined:
      return "refined:" + std::to_string(factor);
  }
  return "same";
}

PressureKind parse_pressure(std::string_view text) {
  if (text == "p1") return PressureKind::p1;
  if (text == "p0") return PressureKind::p0;
  throw ConfigError("pressure", "expected p1 or p0, got '" + std::string(text) + "'");
}

std::string to_string(PressureKind kind) { return kind == PressureKind::p1 ? "p1" : "p0"; }

GammaChoice GammaChoice::parse(std::string_view text) {
  const auto number = [](const std::string& s) {
    std::size_t used = 0;
    double v = -1.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size() || !std::isfinite(v) || v < 0.0) {
      throw ConfigError("gamma", "expected a nonnegative real, auto or auto:<fraction>, got '" +
                                     s + "'");
    }
    return v;
  };
  if (text == "auto") return {true, 0.5};
  constexpr std::string_view prefix = "auto:";
  if (text.starts_with(prefix)) return {true, number(std::string(text.substr(prefix.size())))};
  return {false, number(std::string(text))};
}

std::string GammaChoice::to_string() const {
  return relative ? "auto:" + format_real(value) : format_real(value);
}

void ModelConfig::validate() const {
  const auto pow2 = [](const char* field, int n) {
    if (n < 2 || !is_power_of_two(n)) {
      throw ConfigError(field, "must be a power of two >= 2, got " + std::to_string(n));
    }
  };
  pow2("truth_elems", truth_elems);
  pow2("coarse_elems", coarse_elems);
  if (coarse_elems > truth_elems) {
    throw ConfigError("coarse_elems", "exceeds truth_elems (" + std::to_string(truth_elems) + ")");
  }
  if (w.kind == WChoice::Kind::refined) {
    if (!is_power_of_two(w.factor)) throw ConfigError("w", "refinement factor must be a power of two");
    if (static_cast<long>(coarse_elems) * w.factor > truth_elems) {
      throw ConfigError("w", "refined auxiliary mesh (" +
                                 std::to_string(static_cast<long>(coarse_elems) * w.factor) +
                                 " elements) is finer than the truth mesh");
    }
  }
  if (!std::isfinite(reaction) || reaction < 0.0) {
    throw ConfigError("reaction", "must be a finite nonnegative real");
  }
  if (!std::isfinite(gamma.value) || gamma.value < 0.0) {
    throw ConfigError("gamma", "must be a finite nonnegative real");
  }
  if (s.kind == dualprod::StiffnessKind::scaled_gramian && !(s.sigma > 0.0)) {
    throw ConfigError("s", "scale factor must be positive");
  }
}

double ManufacturedSolution::u(double x) { return std::sin(pi * x); }
double ManufacturedSolution::du(double x) { return pi * std::cos(pi * x); }
double ManufacturedSolution::p(double x) { return std::cos(pi * x); }
double ManufacturedSolution::f(double x, double reaction) {
  return (pi * pi + reaction - pi) * std::sin(pi * x);
}

Matrix p1_stiffness(int elems) {
  const Mesh1D mesh(elems);
  const Index n = elems - 1;
  const double inv_h = 1.0 / mesh.h();
  Matrix g = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    g(i, i) = 2.0 * inv_h;
    if (i + 1 < n) g(i, i + 1) = g(i + 1, i) = -inv_h;
  }
  return g;
}

Matrix p1_mass(int elems) {
  const Mesh1D mesh(elems);
  const Index n = elems - 1;
  const double h = mesh.h();
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = 4.0 * h / 6.0;
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = h / 6.0;
  }
  return m;
}

Matrix p1_prolongation(int fine_elems, int coarse_elems) {
  (void)Mesh1D{fine_elems};
  (void)Mesh1D{coarse_elems};
  const int r = ratio_of(fine_elems, coarse_elems);
  Matrix e = Matrix::Zero(fine_elems - 1, coarse_elems - 1);
  for (int j = 1; j < coarse_elems; ++j) {
    for (int i = std::max(1, (j - 1) * r + 1); i <= std::min(fine_elems - 1, (j + 1) * r - 1); ++i) {
      e(i - 1, j - 1) = hat_weight(i, j, r);
    }
  }
  return e;
}

Matrix pressure_prolongation(PressureKind kind, int fine_elems, int coarse_elems) {
  const int r = ratio_of(fine_elems, coarse_elems);
  if (kind == PressureKind::p0) {
    Matrix e = Matrix::Zero(fine_elems, coarse_elems);
    for (int i = 0; i < fine_elems; ++i) e(i, i / r) = 1.0;
    return e;
  }
  Matrix e = Matrix::Zero(fine_elems + 1, coarse_elems + 1);
  for (int j = 0; j <= coarse_elems; ++j) {
    for (int i = std::max(0, (j - 1) * r + 1); i <= std::min(fine_elems, (j + 1) * r - 1); ++i) {
      e(i, j) = hat_weight(i, j, r);
    }
  }
  return e;
}

Matrix pressure_mass(PressureKind kind, int elems) {
  const Mesh1D mesh(elems);
  const double h = mesh.h();
  if (kind == PressureKind::p0) return h * Matrix::Identity(elems, elems);
  Matrix m = Matrix::Zero(elems + 1, elems + 1);
  for (int e = 0; e < elems; ++e) {
    m(e, e) += 2.0 * h / 6.0;
    m(e + 1, e + 1) += 2.0 * h / 6.0;
    m(e, e + 1) += h / 6.0;
    m(e + 1, e) += h / 6.0;
  }
  return m;
}

Matrix assemble_b(PressureKind kind, int truth_elems, int pressure_elems) {
  const Mesh1D truth(truth_elems);
  const Matrix prolong = pressure_prolongation(kind, truth_elems, pressure_elems);
  const Index nq = prolong.cols();
  const double h = truth.h();
  // Element integrals of every pressure basis function on the truth mesh.
  Matrix integrals(truth_elems, nq);
  for (int e = 0; e < truth_elems; ++e) {
    if (kind == PressureKind::p1) {
      integrals.row(e) = 0.5 * h * (prolong.row(e) + prolong.row(e + 1));
    } else {
      integrals.row(e) = h * prolong.row(e);
    }
  }
  // phi_i' is +1/h on element i-1 and -1/h on element i.
  Matrix b(truth_elems - 1, nq);
  for (int i = 1; i < truth_elems; ++i) {
    b.row(i - 1) = (integrals.row(i - 1) - integrals.row(i)) / h;
  }
  return b;
}

saddle::SaddleProblem build_truth(const ModelConfig& cfg) {
  cfg.validate();
  const Mesh1D truth(cfg.truth_elems);
  const int nt = cfg.truth_elems;
  const double h = truth.h();
  const Matrix g = p1_stiffness(nt);
  const Matrix a = cfg.reaction > 0.0 ? Matrix(g + cfg.reaction * p1_mass(nt)) : g;
  const Matrix b = assemble_b(cfg.pressure, nt, cfg.coarse_elems);
  const Matrix q_gram = pressure_mass(cfg.pressure, cfg.coarse_elems);

  Vector f = Vector::Zero(nt - 1);
  for (int e = 0; e < nt; ++e) {
    const double x0 = truth.node(e), x1 = truth.node(e + 1);
    const auto src = [&](double x) { return ManufacturedSolution::f(x, cfg.reaction); };
    // left node e carries the decreasing hat, right node e+1 the increasing one
    if (e >= 1) f(e - 1) += integrate(x0, x1, [&](double x) { return src(x) * (x1 - x) / h; });
    if (e + 1 <= nt - 1) f(e) += integrate(x0, x1, [&](double x) { return src(x) * (x - x0) / h; });
  }

  // <G, psi_l> = b(psi_l, u) = int psi_l u'
  const Matrix prolong = pressure_prolongation(cfg.pressure, nt, cfg.coarse_elems);
  Vector g_rhs = Vector::Zero(prolong.cols());
  for (int e = 0; e < nt; ++e) {
    const double x0 = truth.node(e), x1 = truth.node(e + 1);
    if (cfg.pressure == PressureKind::p1) {
      const double wl = integrate(x0, x1, [&](double x) { return ManufacturedSolution::du(x) * (x1 - x) / h; });
      const double wr = integrate(x0, x1, [&](double x) { return ManufacturedSolution::du(x) * (x - x0) / h; });
      g_rhs += wl * prolong.row(e).transpose() + wr * prolong.row(e + 1).transpose();
    } else {
      g_rhs += integrate(x0, x1, ManufacturedSolution::du) * prolong.row(e).transpose();
    }
  }

  auto space = std::make_shared<const hilbert::TruthSpace>(
      g, "P1 truth space, " + std::to_string(nt) + " elements");
  saddle::PressureReference ref{prolong, pressure_mass(cfg.pressure, nt)};
  return saddle::SaddleProblem(std::move(space), a, b, q_gram, {f}, g_rhs, std::move(ref));
}

saddle::Discretization build_spaces(const ModelConfig& cfg, const saddle::SaddleProblem& pb) {
  cfg.validate();
  if (pb.truth().dim() != cfg.truth_elems - 1) {
    throw NestingViolated("problem truth space does not match truth_elems");
  }
  const auto& truth = pb.truth_ptr();
  hilbert::Subspace u(truth, p1_prolongation(cfg.truth_elems, cfg.coarse_elems));
  const hilbert::Subspace w = [&] {
    switch (cfg.w.kind) {
      case WChoice::Kind::truth:
        return hilbert::Subspace(truth, Matrix::Identity(truth->dim(), truth->dim()));
      case WChoice::Kind::same:
        return u;
      case WChoice::Kind::refined:
        return hilbert::Subspace(
            truth, p1_prolongation(cfg.truth_elems, cfg.coarse_elems * cfg.w.factor));
    }
    return u;
  }();
  dualprod::DualProduct dp(w, dualprod::make_stiffness(w, cfg.s));
  saddle::Discretization d(std::move(u), std::move(dp), cfg.gamma.relative ? 0.0 : cfg.gamma.value);
  if (!cfg.gamma.relative) return d;
  const double gamma0 = saddle::constants(pb, d).gamma0;
  return d.with_gamma(cfg.gamma.value * gamma0);
}

saddle::ExactPair interpolate_exact(const ModelConfig& cfg) {
  const Mesh1D truth(cfg.truth_elems);
  const int nt = cfg.truth_elems;
  saddle::ExactPair ex;
  ex.u.resize(nt - 1);
  for (int i = 1; i < nt; ++i) ex.u(i - 1) = ManufacturedSolution::u(truth.node(i));
  if (cfg.pressure == PressureKind::p1) {
    ex.p.resize(nt + 1);
    for (int i = 0; i <= nt; ++i) ex.p(i) = ManufacturedSolution::p(truth.node(i));
  } else {
    ex.p.resize(nt);
    for (int e = 0; e < nt; ++e) {
      ex.p(e) = integrate(truth.node(e), truth.node(e + 1), ManufacturedSolution::p) / truth.h();
    }
  }
  return ex;
}

saddle::SaddleProblem with_discrete_solution(const saddle::SaddleProblem& pb,
                                             const saddle::Discretization& d, const Vector& x,
                                             const Vector& y) {
  const Vector u = d.U().embed(x);
  Vector f = pb.a_truth() * u - pb.b_truth() * y;
  Vector g = pb.b_truth().transpose() * u;
  return pb.with_data({std::move(f)}, std::move(g));
}

saddle::ErrorNorms error_norms(const saddle::SaddleProblem& pb, const saddle::Discretization& d,
                               const saddle::Solution& sol, const saddle::ExactPair& exact) {
  return saddle::solution_errors(pb, d, sol, exact);
}

}  // namespace dualstab::models
