#include "pxlab/solver.hpp"

#include <Eigen/SparseLU>
#include <cstdio>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pxlab/diffops.hpp"

namespace pxlab::solver {

namespace {

double max_abs(const std::vector<double>& values) {
  double m = 0.0;
  for (double x : values) m = std::max(m, std::abs(x));
  return m;
}

ScalarField sample_and_mollify(const expr::Expression& e, const GridSpec& grid, double radius) {
  ScalarField raw = sample(e, grid);
  if (radius <= 0.0) return raw;
  ScalarField out = mollify(raw, radius);
  // Nodes without kernel support keep the raw value and count as valid data.
  std::fill(out.valid.begin(), out.valid.end(), 1);
  return out;
}

bool is_interior(const GridSpec& grid, std::size_t node) { return grid.boundary_distance(node) >= 1; }

FrozenOperator assemble(const ScalarField& current, const ProblemData& data, double eps, bool identity) {
  const GridSpec& grid = current.grid;
  const int n = grid.dimension();
  const std::size_t count = grid.node_count();
  const VectorField dv = diffops::gradient(current);

  const double lo = std::min(1.0, data.window.t_minus - 1.0) - 1e-12;
  const double hi = data.window.t_plus + 1.0 + 1e-12;

  FrozenOperator op;
  op.rhs.resize(static_cast<Eigen::Index>(count));
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(count * (n == 2 ? 9 : 19));
  op.ellipticity_min = std::numeric_limits<double>::infinity();
  op.ellipticity_max = -std::numeric_limits<double>::infinity();

  for (std::size_t node = 0; node < count; ++node) {
    const auto row = static_cast<Eigen::Index>(node);
    if (!is_interior(grid, node)) {
      triplets.emplace_back(row, row, 1.0);
      op.rhs[row] = data.boundary[node];
      continue;
    }
    const Mat a = identity ? Mat(Mat::Identity()) : frozen_coefficient(dv[node], data.p[node], eps, n);
    if (!identity) {
      const double q = dv[node].squaredNorm();
      const double lam = 1.0 + (data.p[node] - 2.0) * q / (q + eps);
      const double lmin = std::min(1.0, lam);
      const double lmax = std::max(1.0, lam);
      op.ellipticity_min = std::min(op.ellipticity_min, lmin);
      op.ellipticity_max = std::max(op.ellipticity_max, lmax);
      if (lmin < lo || lmax > hi) {
        throw NumericalError("frozen coefficient leaves the ellipticity window at node " + std::to_string(node));
      }
    }
    double center = 1.0;
    double off = 0.0;
    for (int i = 0; i < n; ++i) {
      const double hi2 = grid.spacing(i) * grid.spacing(i);
      const auto si = static_cast<Eigen::Index>(grid.stride(i));
      center += 2.0 * a(i, i) / hi2;
      triplets.emplace_back(row, row - si, -a(i, i) / hi2);
      triplets.emplace_back(row, row + si, -a(i, i) / hi2);
      off += 2.0 * std::abs(a(i, i) / hi2);
      for (int j = i + 1; j < n; ++j) {
        const auto sj = static_cast<Eigen::Index>(grid.stride(j));
        const double w = -2.0 * a(i, j) / (4.0 * grid.spacing(i) * grid.spacing(j));
        triplets.emplace_back(row, row + si + sj, w);
        triplets.emplace_back(row, row + si - sj, -w);
        triplets.emplace_back(row, row - si + sj, -w);
        triplets.emplace_back(row, row - si - sj, w);
        off += 4.0 * std::abs(w);
      }
    }
    triplets.emplace_back(row, row, center);
    op.rhs[row] = data.g[node];
    if (off > center * (1.0 + 1e-12)) ++op.dominance_violations;
  }
  if (identity || op.ellipticity_min > op.ellipticity_max) op.ellipticity_min = op.ellipticity_max = 1.0;
  op.matrix.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  return op;
}

double interior_residual(const FrozenOperator& op, const ScalarField& v) {
  const Eigen::Map<const Eigen::VectorXd> x(v.values.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::VectorXd r = op.matrix * x - op.rhs;
  double m = 0.0;
  for (std::size_t node = 0; node < v.size(); ++node) {
    if (is_interior(v.grid, node)) m = std::max(m, std::abs(r[static_cast<Eigen::Index>(node)]));
  }
  return m;
}

class LinearSolver {
 public:
  void solve(const FrozenOperator& op, ScalarField& out) {
    if (!analyzed_) {
      lu_.analyzePattern(op.matrix);
      analyzed_ = true;
    }
    lu_.factorize(op.matrix);
    if (lu_.info() != Eigen::Success) throw NumericalError("sparse LU factorization failed: " + lu_.lastErrorMessage());
    Eigen::VectorXd x = lu_.solve(op.rhs);
    // Normwise backward error: the residual scaled by |A| |x| + |b|.
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(op.matrix.rows());
    for (Eigen::Index c = 0; c < op.matrix.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, c); it; ++it) row_sums[it.row()] += std::abs(it.value());
    }
    const double anorm = row_sums.maxCoeff();
    const double bnorm = op.rhs.lpNorm<Eigen::Infinity>();
    double rel = 0.0;
    for (int pass = 0; pass < 4; ++pass) {
      const Eigen::VectorXd r = op.rhs - op.matrix * x;
      const double scale = anorm * x.lpNorm<Eigen::Infinity>() + bnorm;
      rel = scale > 0.0 ? r.lpNorm<Eigen::Infinity>() / scale : r.lpNorm<Eigen::Infinity>();
      if (rel <= 1e-14) break;
      x += lu_.solve(r);
    }
    if (!(rel <= 1e-12)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "linear solve relative residual %.3g above 1e-12", rel);
      throw NumericalError(buf);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[static_cast<Eigen::Index>(i)];
  }

 private:
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

}  // namespace

void ProblemSpec::validate() const {
  const int n = grid.dimension();
  if (p.dimension() != n || f.dimension() != n || boundary.dimension() != n) {
    throw PreconditionError("problem expressions must match the grid dimension");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0, 1)");
  if (!(mollify_radius >= 0.0)) throw PreconditionError("mollification radius must be nonnegative");
}

ProblemData prepare(const ProblemSpec& spec) {
  spec.validate();
  const ScalarField p_raw = sample(spec.p, spec.grid);
  theory::ExponentWindow w;
  w.t_minus = *std::min_element(p_raw.values.begin(), p_raw.values.end());
  w.t_plus = *std::max_element(p_raw.values.begin(), p_raw.values.end());
  if (!(w.t_minus > 1.0)) {
    throw PreconditionError("sampled exponent p reaches " + std::to_string(w.t_minus) + " <= 1");
  }
  ScalarField p = spec.mollify_radius > 0.0 ? sample_and_mollify(spec.p, spec.grid, spec.mollify_radius) : p_raw;
  ScalarField f = sample_and_mollify(spec.f, spec.grid, spec.mollify_radius);
  ScalarField u = sample_and_mollify(spec.boundary, spec.grid, spec.mollify_radius);
  ScalarField g(spec.grid, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = f[i] + u[i];
  return ProblemData{std::move(p), std::move(g), sample(spec.boundary, spec.grid), w};
}

double tied_mollification_radius(const GridSpec& grid, double eps) {
  return std::clamp(eps, 2.0 * grid.max_spacing(), 0.25 * grid.min_width());
}

void SolveOptions::validate() const {
  if (!(tolerance > 0.0)) throw PreconditionError("solver tolerance must be positive");
  if (max_iterations < 1) throw PreconditionError("solver needs at least one iteration");
  if (!(damping > 0.0 && damping <= 1.0)) throw PreconditionError("damping must lie in (0, 1]");
}

Mat frozen_coefficient(const Vec& dv, double p, double eps, int n) {
  Mat a = Mat::Zero();
  a.topLeftCorner(n, n).setIdentity();
  const double q = dv.squaredNorm() + eps;
  if (q > 0.0) a += (p - 2.0) * dv * dv.transpose() / q;
  return a;
}

FrozenOperator assemble_frozen_operator(const ScalarField& current, const ProblemData& data, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("frozen operator needs eps > 0");
  return assemble(current, data, eps, false);
}

double equation_residual(const ScalarField& v, const ProblemData& data, double eps) {
  return interior_residual(assemble_frozen_operator(v, data, eps), v);
}

SolveResult solve_regularized(const ProblemSpec& spec, const SolveOptions& options, const ScalarField* initial) {
  options.validate();
  SolveResult res{ScalarField(spec.grid, 0.0), prepare(spec)};
  const ProblemData& data = res.data;
  res.g_norm = max_abs(data.g.values);
  const double target = 10.0 * options.tolerance * res.g_norm;

  LinearSolver linear;
  ScalarField v(spec.grid, 0.0);
  if (initial) {
    if (!(initial->grid == spec.grid)) throw PreconditionError("initial iterate lives on a different grid");
    v.values = initial->values;
  } else {
    linear.solve(assemble(v, data, spec.eps, true), v);
  }

  FrozenOperator op = assemble(v, data, spec.eps, false);
  double residual = interior_residual(op, v);
  res.ellipticity_min = op.ellipticity_min;
  res.ellipticity_max = op.ellipticity_max;
  ScalarField best = v;
  double best_residual = residual;
  double best_update = INFINITY;
  int best_iterations = 0;
  std::size_t best_violations = op.dominance_violations;

  ScalarField w(spec.grid, 0.0);
  double update = INFINITY;
  int k = 0;
  for (;;) {
    if (k > 0 && update < options.tolerance && (residual <= target || res.g_norm == 0.0)) {
      res.converged = true;
      break;
    }
    if (k == options.max_iterations) break;
    linear.solve(op, w);
    double diff = 0.0;
    double size = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double next = v[i] + options.damping * (w[i] - v[i]);
      diff = std::max(diff, std::abs(next - v[i]));
      size = std::max(size, std::abs(next));
      v[i] = next;
    }
    update = size > 0.0 ? diff / size : diff;
    ++k;
    op = assemble(v, data, spec.eps, false);
    residual = interior_residual(op, v);
    res.ellipticity_min = std::min(res.ellipticity_min, op.ellipticity_min);
    res.ellipticity_max = std::max(res.ellipticity_max, op.ellipticity_max);
    if (residual <= best_residual) {
      best = v;
      best_residual = residual;
      best_update = update;
      best_iterations = k;
      best_violations = op.dominance_violations;
    }
  }

  if (res.converged) {
    res.v = std::move(v);
    res.residual = residual;
    res.update = update;
    res.iterations = k;
    res.dominance_violations = op.dominance_violations;
  } else {
    res.v = std::move(best);
    res.residual = best_residual;
    res.update = best_update;
    res.iterations = best_iterations;
    res.dominance_violations = best_violations;
  }

  double bmin = INFINITY;
  double bmax = -INFINITY;
  for (std::size_t node = 0; node < data.boundary.size(); ++node) {
    if (is_interior(spec.grid, node)) continue;
    bmin = std::min(bmin, data.boundary[node]);
    bmax = std::max(bmax, data.boundary[node]);
  }
  res.principle_lower = bmin - res.g_norm;
  res.principle_upper = bmax + res.g_norm;
  const auto [vmin, vmax] = std::minmax_element(res.v.values.begin(), res.v.values.end());
  res.principle_holds = *vmin >= res.principle_lower - 1e-8 && *vmax <= res.principle_upper + 1e-8;
  return res;
}

expr::Expression manufactured_rhs(const expr::Expression& u, const expr::Expression& p, double eps,
                                  bool with_identity) {
  const int n = u.dimension();
  if (p.dimension() != n) throw PreconditionError("expressions of different dimensions combined");
  if (!(eps >= 0.0)) throw PreconditionError("eps must be nonnegative");
  std::vector<expr::Expression> d;
  for (int i = 0; i < n; ++i) d.push_back(expr::differentiate(u, i));
  expr::Expression lap = expr::Expression::constant(0.0, n);
  expr::Expression inf_lap = expr::Expression::constant(0.0, n);
  expr::Expression q = expr::Expression::constant(eps, n);
  for (int i = 0; i < n; ++i) {
    q = q + d[i] * d[i];
    for (int j = 0; j < n; ++j) {
      const expr::Expression dij = expr::differentiate(d[i], j);
      if (i == j) lap = lap + dij;
      inf_lap = inf_lap + d[i] * dij * d[j];
    }
  }
  const expr::Expression two = expr::Expression::constant(2.0, n);
  expr::Expression rhs = -lap;
  double pc = 0.0;
  const bool p_is_two = p.is_constant(&pc) && pc == 2.0;
  double lc = 0.0;
  if (!p_is_two && !(inf_lap.is_constant(&lc) && lc == 0.0)) rhs = rhs - (p - two) * inf_lap / q;
  if (with_identity) rhs = rhs + u;
  return rhs;
}

BallRegion central_ball(const GridSpec& grid) {
  BallRegion b;
  for (int a = 0; a < grid.dimension(); ++a) b.center[a] = 0.5 * (grid.lower(a) + grid.upper(a));
  b.radius = 0.5 * grid.min_width();
  return b;
}

ContinuationResult epsilon_continuation(const ProblemSpec& base, const std::vector<double>& schedule,
                                        const SolveOptions& options, bool tie_mollification) {
  if (schedule.empty()) throw PreconditionError("eps schedule is empty");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw PreconditionError("eps schedule entries must be positive");
    if (k > 0 && !(schedule[k] < schedule[k - 1])) throw PreconditionError("eps schedule must strictly decrease");
  }
  ContinuationResult out;
  out.schedule = schedule;
  out.ball = central_ball(base.grid);
  const auto nodes = ball_nodes(base.grid, out.ball.scaled(0.75));
  VectorField previous(base.grid, Vec::Zero());
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    ProblemSpec spec = base;
    spec.eps = schedule[k];
    if (tie_mollification) spec.mollify_radius = tied_mollification_radius(base.grid, schedule[k]);
    const ScalarField* warm = k > 0 ? &out.solves.back().v : nullptr;
    SolveResult r = solve_regularized(spec, options, warm);
    if (!r.converged) {
      throw NumericalError("continuation solve at eps = " + std::to_string(schedule[k]) + " did not converge");
    }
    VectorField dv = diffops::gradient(r.v);
    if (k > 0) {
      double inc = 0.0;
      for (auto node : nodes) {
        if (dv.valid[node] && previous.valid[node]) inc = std::max(inc, (dv[node] - previous[node]).norm());
      }
      out.increments.push_back(inc);
    }
    previous = std::move(dv);
    out.solves.push_back(std::move(r));
  }
  return out;
}

}  // namespace pxlab::solver
