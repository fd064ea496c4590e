#pragma once

// Numerical audits of the pointwise, distortion, energy and reverse-Hoelder
// estimates for the stretched gradient F = (|Dv|^2 + eps)^(beta/2) Dv.
//
// Every audit uses only nodes where the discrete Jacobian of F is
// interior-valid (two nodes away from the box boundary).

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pxlab/grid.hpp"
#include "pxlab/theory.hpp"

namespace pxlab::estimates {

/// The data handed to an audit do not satisfy the equation well enough for
/// the audit to mean anything.
class AuditError : public Error {
 public:
  using Error::Error;
};

struct EstimateReport {
  std::string audit;
  std::string region;
  int n = 2;
  theory::ExponentWindow window;
  double beta = 0.0;
  double eps = 0.0;
  double h = 0.0;
  bool has_constants = false;
  theory::ConstantSet constants;

  /// Worst residual or ratio, in the audit's own normalization.
  double worst = 0.0;
  std::size_t worst_node = 0;
  Vec worst_location = Vec::Zero();
  double tolerance = 0.0;
  bool passed = true;
  std::size_t nodes = 0;
  std::size_t violations = 0;

  /// Audit-specific scalars, in a fixed order.
  std::vector<std::pair<std::string, double>> metrics;
  /// Per-node or per-ball records.
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  double metric(const std::string& name) const;
};

struct PointwiseOptions {
  double kappa = 10.0;
  /// Relative equation residual above which the audit refuses to run.
  double equation_tolerance = 1e-6;
};

/// At each node: |DF|^2 - C* sigma2(DF) - C~* (|Dv|^2+eps)^beta (g - v)^2,
/// DF the discrete Jacobian of F. Passes when the residual stays below
/// kappa h^2 (1 + |DF|^2) everywhere; `worst` is the largest residual over
/// that allowance. Throws AuditError when v misses the equation with exponent
/// p and right-hand side g by more than the equation tolerance.
EstimateReport pointwise_sigma2_audit(const ScalarField& v, const ScalarField& p, const ScalarField& g,
                                      const diffops::StretchParams& s, const theory::ExponentWindow& w,
                                      const PointwiseOptions& options = {});

struct QuasiregularityOptions {
  /// Nodes with |DF| <= floor * max |DF| are excluded from the supremum.
  double floor = 1e-12;
  /// Optional upper bound on the distortion.
  std::optional<double> bound;
  /// Optional region; the whole valid interior otherwise.
  std::optional<BallRegion> region;
};

/// Distortion K = |DF|^2 / sigma2(DF) of F = |Du|^beta Du. Nodes above the
/// floor with sigma2 <= 0 are violations. `worst` is the supremum of K.
EstimateReport quasiregularity_audit(const ScalarField& u, double beta, const QuasiregularityOptions& options = {});

/// Mean of F = (|Dv|^2+eps)^(beta/2) Dv over the nodes of `ball`.
Vec ball_mean(const VectorField& field, const BallRegion& ball);

/// Energy inequality with the cutoff of `ball`:
///   int |DF|^2 phi^2 <= C# [int |F - c|^2 |D phi|^2 + int (|Dv|^2+eps)^beta (g - v)^2 phi^2].
/// `c` defaults to the mean of F over 3/4 B. `worst` is LHS / RHS; passes
/// when it is at most 1.
EstimateReport caccioppoli_audit(const ScalarField& v, const ScalarField& g, const diffops::StretchParams& s,
                                 const theory::ExponentWindow& w, const BallRegion& ball,
                                 std::optional<Vec> c = std::nullopt);

struct BallFamilyOptions {
  Vec center = Vec::Zero();
  double max_radius = 0.4;
  std::uint64_t seed = 1;
  /// Radii R_max / 2^k stop below this many max spacings.
  double min_radius_spacings = 8.0;
};

/// Concentric balls of radii R_max / 2^k plus, for each radius, a lattice of
/// centres at spacing R jittered by up to R / 4; only balls whose 3/4
/// sub-ball fits with the two-node margin are kept.
std::vector<BallRegion> make_ball_family(const GridSpec& grid, const BallFamilyOptions& options);

struct BallRatio {
  BallRegion ball;
  double lhs = 0.0;
  double oscillation = 0.0;
  double source = 0.0;
  double ratio = 0.0;
};

struct GehringResult {
  std::vector<BallRegion> balls;
  /// Exponents evaluated, in evaluation order.
  std::vector<double> searched;
  double delta = 0.0;
  /// False when even delta = 0 exceeds the budget.
  bool found = true;
  double c_target = 0.0;
  /// Per-ball ratios at `delta`.
  std::vector<BallRatio> table;
  double worst_ratio = 0.0;
};

/// For each ball: (avg_{B/4} |DF|^(2+delta))^(1/(2+delta)) against
/// (1/R)(avg_{3B/4} |F - c|^2)^(1/2) + (avg_{3B/4} (|Du|^beta |f|)^(2+delta))^(1/(2+delta)),
/// with F = |Du|^beta Du and c the mean of F over 3/4 B.
GehringResult reverse_holder_audit(const ScalarField& u, const ScalarField& f, double beta, double delta,
                                   const std::vector<BallRegion>& balls);

/// Largest delta in [0, 2], to resolution 1e-3, for which every ratio stays at
/// or below c_target, found by bisection.
GehringResult gehring_delta_search(const ScalarField& u, const ScalarField& f, double beta,
                                   const std::vector<BallRegion>& balls, double c_target, double resolution = 1e-3);

}  // namespace pxlab::estimates
