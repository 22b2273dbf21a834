#pragma once

// One-dimensional Stokes-like mixed model on (0, 1):
//   V = H^1_0 with the seminorm scalar product, H = L^2_0,
//   a(u, v) = int u'v' + r int u v,  b(q, v) = int q v'.
// Velocities are continuous P1 with homogeneous Dirichlet conditions, the
// pressure is P1-continuous or P0. All meshes are uniform and dyadic so every
// coarse space is nested in the truth space.

#include <string>
#include <string_view>

#include "dualstab/dualprod.hpp"
#include "dualstab/saddle.hpp"

namespace dualstab::models {

using algebra::Index;
using algebra::Matrix;
using algebra::Vector;

class Mesh1D {
 public:
  /// Throws NestingViolated unless n_elems >= 2 is a power of two.
  explicit Mesh1D(int n_elems);

  int n_elems() const noexcept { return n_elems_; }
  double h() const noexcept { return 1.0 / n_elems_; }
  double node(int i) const noexcept { return static_cast<double>(i) / n_elems_; }

 private:
  int n_elems_;
};

enum class PressureKind { p1, p0 };

struct WChoice {
  enum class Kind { refined, truth, same } kind = Kind::refined;
  int factor = 2;  // refined only

  /// Accepts "refined:<k>", "truth" and "same".
  static WChoice parse(std::string_view text);
  std::string to_string() const;
};

PressureKind parse_pressure(std::string_view text);
std::string to_string(PressureKind kind);

/// gamma is either a literal value or a fraction of the measured gamma0.
struct GammaChoice {
  bool relative = true;
  double value = 0.5;

  /// Accepts a nonnegative real, "auto" (= auto:0.5) or "auto:<fraction>".
  static GammaChoice parse(std::string_view text);
  std::string to_string() const;
};

struct ModelConfig {
  int truth_elems = 256;
  int coarse_elems = 16;
  PressureKind pressure = PressureKind::p1;
  WChoice w{};
  dualprod::StiffnessChoice s{};
  GammaChoice gamma{};
  /// Reaction coefficient r >= 0 in a; r > 0 gives alpha < ||A||.
  double reaction = 0.0;

  /// Throws ConfigError or NestingViolated.
  void validate() const;
};

/// u(x) = sin(pi x), p(x) = cos(pi x).
struct ManufacturedSolution {
  static double u(double x);
  static double du(double x);
  static double p(double x);
  /// -u'' + r u + p'
  static double f(double x, double reaction);
};

/// Truth problem for the configured coarse pressure space, with the truth
/// mesh pressure space of the same kind as reference.
saddle::SaddleProblem build_truth(const ModelConfig& cfg);

/// Nodal interpolation weights of the coarse interior hats on the fine mesh.
Matrix p1_prolongation(int fine_elems, int coarse_elems);
/// Pressure prolongation (all nodes for P1, elements for P0).
Matrix pressure_prolongation(PressureKind kind, int fine_elems, int coarse_elems);
/// Pressure Gramian in L^2.
Matrix pressure_mass(PressureKind kind, int elems);
/// P1 stiffness on the interior nodes.
Matrix p1_stiffness(int elems);
/// P1 mass on the interior nodes.
Matrix p1_mass(int elems);
/// b(psi_l, phi_i) for truth velocities and pressures on `pressure_elems`.
Matrix assemble_b(PressureKind kind, int truth_elems, int pressure_elems);

/// Builds U, W and S; resolves a relative gamma against the measured gamma0.
saddle::Discretization build_spaces(const ModelConfig& cfg, const saddle::SaddleProblem& pb);

/// Interpolant of the manufactured solution in the truth velocity space and
/// the reference pressure space.
saddle::ExactPair interpolate_exact(const ModelConfig& cfg);

/// Data (F, G) for which (E_U x, y) solves the problem exactly.
saddle::SaddleProblem with_discrete_solution(const saddle::SaddleProblem& pb,
                                             const saddle::Discretization& d, const Vector& x,
                                             const Vector& y);

saddle::ErrorNorms error_norms(const saddle::SaddleProblem& pb, const saddle::Discretization& d,
                               const saddle::Solution& sol, const saddle::ExactPair& exact);

}  // namespace dualstab::models
