#pragma once

// Finite-difference solver for the regularized Dirichlet problem
//
//   -Lap w - (p - 2) InfLap w / (|Dw|^2 + eps) + w = g   in the box,
//   w = u                                                on its boundary,
//
// with g = f + u after optional mollification of p, f and u.

#include <Eigen/SparseCore>
#include <optional>
#include <vector>

#include "pxlab/grid.hpp"
#include "pxlab/theory.hpp"

namespace pxlab::solver {

struct ProblemSpec {
  GridSpec grid;
  expr::Expression p;
  expr::Expression f;
  expr::Expression boundary;
  double eps = 1e-2;
  /// Radius used to mollify p, f and u; 0 samples them directly.
  double mollify_radius = 0.0;

  /// Checks dimensions, eps in (0, 1) and the sampled window 1 < t_-.
  void validate() const;
};

/// Sampled and mollified data of a ProblemSpec.
struct ProblemData {
  ScalarField p;
  ScalarField g;
  /// Raw boundary expression sampled on every node; Dirichlet data.
  ScalarField boundary;
  /// Bounds of the raw sampled p.
  theory::ExponentWindow window;
};

ProblemData prepare(const ProblemSpec& spec);

/// The radius the continuation ties to eps: eps clipped to
/// [2 max h, min width / 4].
double tied_mollification_radius(const GridSpec& grid, double eps);

struct SolveOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
  double damping = 1.0;

  void validate() const;
};

struct SolveResult {
  ScalarField v;
  ProblemData data;
  int iterations = 0;
  bool converged = false;
  /// Last relative update ||v_k+1 - v_k||_inf / ||v_k+1||_inf.
  double update = 0.0;
  /// Max-norm of the discrete nonlinear equation over interior nodes.
  double residual = 0.0;
  double g_norm = 0.0;
  /// Range of the eigenvalues of the frozen coefficient over all iterations.
  double ellipticity_min = 1.0;
  double ellipticity_max = 1.0;
  /// Interior rows of the last operator that are not diagonally dominant.
  std::size_t dominance_violations = 0;
  /// [min boundary - ||g||, max boundary + ||g||] and whether v stays inside.
  double principle_lower = 0.0;
  double principle_upper = 0.0;
  bool principle_holds = true;
};

/// I + (p - 2) Dv (x) Dv / (|Dv|^2 + eps) on the leading n x n block.
Mat frozen_coefficient(const Vec& dv, double p, double eps, int n);

struct FrozenOperator {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  double ellipticity_min = 1.0;
  double ellipticity_max = 1.0;
  std::size_t dominance_violations = 0;
};

/// Rows -A:D^2 + 1 at interior nodes with A frozen at the gradient of
/// `current`; identity rows carrying the Dirichlet data on the boundary.
/// Throws NumericalError if an eigenvalue of A leaves
/// [min(1, t_- - 1), t_+ + 1].
FrozenOperator assemble_frozen_operator(const ScalarField& current, const ProblemData& data, double eps);

/// Max-norm over interior nodes of -A(v):D^2v + v - g, A taken at v.
double equation_residual(const ScalarField& v, const ProblemData& data, double eps);

/// Damped Picard iteration. Starts from `initial` when given, otherwise from
/// the solution of the problem with A = I. Returns the iterate with the
/// smallest residual, flagged unconverged, if the iteration limit is hit.
/// Throws NumericalError if a linear solve misses relative residual 1e-12.
SolveResult solve_regularized(const ProblemSpec& spec, const SolveOptions& options,
                              const ScalarField* initial = nullptr);

/// -Lap u - (p - 2) InfLap u / (|Du|^2 + eps), plus u when `with_identity`.
expr::Expression manufactured_rhs(const expr::Expression& u, const expr::Expression& p, double eps,
                                  bool with_identity = false);

struct ContinuationResult {
  std::vector<double> schedule;
  std::vector<SolveResult> solves;
  /// max |Dv_k - Dv_k+1| over 3/4 of `ball`; one fewer than solves.
  std::vector<double> increments;
  BallRegion ball;
};

/// Ball centred in the box with radius half the smallest side.
BallRegion central_ball(const GridSpec& grid);

/// Solves along a strictly decreasing eps schedule, warm-starting each solve.
/// With `tie_mollification` the radius follows tied_mollification_radius;
/// otherwise the template's radius is kept.
ContinuationResult epsilon_continuation(const ProblemSpec& base, const std::vector<double>& schedule,
                                        const SolveOptions& options, bool tie_mollification = true);

}  // namespace pxlab::solver
