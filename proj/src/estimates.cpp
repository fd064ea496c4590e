#include "pxlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pxlab/diffops.hpp"
#include "pxlab/solver.hpp"

namespace pxlab::estimates {

using diffops::StretchParams;

namespace {

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw PreconditionError("audit inputs live on different grids");
}

void add_coordinates(std::vector<std::string>& columns, int n) {
  for (int a = 0; a < n; ++a) columns.push_back("x" + std::to_string(a + 1));
}

void push_row(EstimateReport& r, const Vec& x, std::initializer_list<double> values) {
  std::vector<double> row;
  for (int a = 0; a < r.n; ++a) row.push_back(x[a]);
  row.insert(row.end(), values.begin(), values.end());
  r.rows.push_back(std::move(row));
}

void require_valid(const MatrixField& df, const std::vector<std::size_t>& nodes, const char* what) {
  for (auto node : nodes) {
    if (!df.valid[node]) throw PreconditionError(std::string(what) + " reaches outside the interior-valid region");
  }
}

std::size_t nearest_node(const GridSpec& grid, const Vec& x) {
  Index3 ijk{0, 0, 0};
  for (int a = 0; a < grid.dimension(); ++a) {
    const int i = static_cast<int>(std::lround((x[a] - grid.lower(a)) / grid.spacing(a)));
    ijk[a] = std::clamp(i, 0, grid.points(a) - 1);
  }
  return grid.index(ijk);
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

std::string describe(const BallRegion& b, int n) {
  std::string s = "B((";
  for (int a = 0; a < n; ++a) {
    if (a > 0) s += ", ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", b.center[a]);
    s += buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "), %.6g)", b.scaled_radius());
  return s + buf;
}

}  // namespace

double EstimateReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw PreconditionError("report has no metric " + name);
}

EstimateReport pointwise_sigma2_audit(const ScalarField& v, const ScalarField& p, const ScalarField& g,
                                      const StretchParams& s, const theory::ExponentWindow& w,
                                      const PointwiseOptions& options) {
  require_same_grid(v.grid, p.grid);
  require_same_grid(v.grid, g.grid);
  if (!(s.eps > 0.0)) throw PreconditionError("pointwise audit needs eps > 0");
  s.validate();
  const GridSpec& grid = v.grid;
  const int n = grid.dimension();

  EstimateReport r;
  r.audit = "pointwise_sigma2";
  r.region = "interior";
  r.n = n;
  r.window = w;
  r.beta = s.beta;
  r.eps = s.eps;
  r.h = grid.max_spacing();
  r.constants = theory::constant_set(w, n, s.beta);
  r.has_constants = true;

  const VectorField dv = diffops::gradient(v);
  const MatrixField hess = diffops::hessian(v);
  double eq_residual = 0.0;
  for (std::size_t node = 0; node < v.size(); ++node) {
    if (!hess.valid[node]) continue;
    const Mat a = solver::frozen_coefficient(dv[node], p[node], s.eps, n);
    const double res = -(a.cwiseProduct(hess[node])).sum() + v[node] - g[node];
    eq_residual = std::max(eq_residual, std::abs(res));
  }
  const double eq_scale = 1.0 + max_abs(g);
  if (eq_residual > options.equation_tolerance * eq_scale) {
    throw AuditError("equation residual " + std::to_string(eq_residual) + " too large for the pointwise audit");
  }

  const MatrixField df = diffops::jacobian(diffops::stretched_gradient(v, s));
  const double allowance = options.kappa * r.h * r.h;
  r.tolerance = allowance;
  r.columns = {};
  add_coordinates(r.columns, n);
  r.columns.insert(r.columns.end(), {"lhs", "sigma2", "source", "residual", "allowance"});

  double worst_residual = -INFINITY;
  double max_lhs = 0.0;
  r.worst = -INFINITY;
  for (std::size_t node = 0; node < v.size(); ++node) {
    if (!df.valid[node]) continue;
    ++r.nodes;
    const double lhs = diffops::frobenius_sq(df[node]);
    const double sig = diffops::sigma2(df[node], n);
    const double q = dv[node].squaredNorm() + s.eps;
    const double src = std::pow(q, s.beta) * (g[node] - v[node]) * (g[node] - v[node]);
    const double res = lhs - r.constants.c_star * sig - r.constants.c_tilde_star * src;
    const double local = allowance * (1.0 + lhs);
    const double normalized = res / local;
    if (normalized > 1.0) ++r.violations;
    worst_residual = std::max(worst_residual, res);
    max_lhs = std::max(max_lhs, lhs);
    if (normalized > r.worst) {
      r.worst = normalized;
      r.worst_node = node;
    }
    push_row(r, grid.coordinates(node), {lhs, sig, src, res, local});
  }
  if (r.nodes == 0) throw PreconditionError("no interior-valid nodes to audit");
  r.worst_location = grid.coordinates(r.worst_node);
  r.passed = r.violations == 0;
  r.metrics = {{"max_residual", worst_residual},
               {"max_lhs", max_lhs},
               {"equation_residual", eq_residual},
               {"kappa", options.kappa}};
  return r;
}

EstimateReport quasiregularity_audit(const ScalarField& u, double beta, const QuasiregularityOptions& options) {
  if (!(beta >= 0.0)) throw PreconditionError("quasiregularity audit needs beta >= 0");
  const GridSpec& grid = u.grid;
  const int n = grid.dimension();
  const StretchParams s{beta, 0.0};
  const MatrixField df = diffops::jacobian(diffops::stretched_gradient(u, s));

  std::vector<std::size_t> nodes;
  if (options.region) {
    require_inside(grid, *options.region);
    nodes = ball_nodes(grid, *options.region);
    require_valid(df, nodes, "quasiregularity region");
  } else {
    for (std::size_t node = 0; node < u.size(); ++node)
      if (df.valid[node]) nodes.push_back(node);
  }
  if (nodes.empty()) throw PreconditionError("quasiregularity region contains no nodes");

  EstimateReport r;
  r.audit = "quasiregularity";
  r.region = options.region ? describe(*options.region, n) : "interior";
  r.n = n;
  r.beta = beta;
  r.h = grid.max_spacing();
  r.tolerance = options.bound.value_or(INFINITY);
  add_coordinates(r.columns, n);
  r.columns.insert(r.columns.end(), {"df_norm_sq", "sigma2", "distortion"});

  double max_df = 0.0;
  for (auto node : nodes) max_df = std::max(max_df, df[node].norm());
  const double floor = options.floor * max_df;

  double consistency = 0.0;
  std::size_t below_floor = 0;
  r.worst = 0.0;
  r.worst_node = nodes.front();
  for (auto node : nodes) {
    const Mat& m = df[node];
    const double norm_sq = diffops::frobenius_sq(m);
    const double sig = diffops::sigma2(m, n);
    if (n == 2) consistency = std::max(consistency, std::abs(sig + diffops::det2(m)) / (1.0 + norm_sq));
    ++r.nodes;
    double k = NAN;
    if (std::sqrt(norm_sq) <= floor || max_df == 0.0) {
      ++below_floor;
    } else if (sig <= 0.0) {
      ++r.violations;
      k = INFINITY;
    } else {
      k = norm_sq / sig;
    }
    if (k > r.worst) {
      r.worst = k;
      r.worst_node = node;
    }
    push_row(r, grid.coordinates(node), {norm_sq, sig, k});
  }
  r.worst_location = grid.coordinates(r.worst_node);
  r.passed = r.violations == 0 && (!options.bound || r.worst <= *options.bound);
  r.metrics = {{"below_floor", static_cast<double>(below_floor)},
               {"sigma2_det_consistency", consistency},
               {"max_df_norm", max_df}};
  return r;
}

Vec ball_mean(const VectorField& field, const BallRegion& ball) {
  require_inside(field.grid, ball);
  const auto nodes = ball_nodes(field.grid, ball);
  if (nodes.empty()) throw PreconditionError("ball contains no grid nodes");
  Vec sum = Vec::Zero();
  for (auto node : nodes) sum += field[node];
  return sum / static_cast<double>(nodes.size());
}

EstimateReport caccioppoli_audit(const ScalarField& v, const ScalarField& g, const StretchParams& s,
                                 const theory::ExponentWindow& w, const BallRegion& ball, std::optional<Vec> c) {
  require_same_grid(v.grid, g.grid);
  if (!(s.eps > 0.0)) throw PreconditionError("energy audit needs eps > 0");
  s.validate();
  if (!(ball.radius > 0.0)) throw PreconditionError("degenerate ball");
  const GridSpec& grid = v.grid;
  const int n = grid.dimension();
  const BallRegion support = ball.scaled(0.75);

  const VectorField dv = diffops::gradient(v);
  const VectorField f = diffops::stretched_gradient(v, s);
  const MatrixField df = diffops::jacobian(f);
  const ScalarField phi = cutoff(ball, grid);
  const VectorField dphi = diffops::gradient(phi);
  const auto nodes = ball_nodes(grid, support);
  require_valid(df, nodes, "energy audit ball");
  const Vec cv = c ? *c : ball_mean(f, support);

  EstimateReport r;
  r.audit = "caccioppoli";
  r.region = describe(ball, n);
  r.n = n;
  r.window = w;
  r.beta = s.beta;
  r.eps = s.eps;
  r.h = grid.max_spacing();
  r.constants = theory::constant_set(w, n, s.beta);
  r.has_constants = true;
  r.tolerance = 1.0;

  // D phi reaches one node past 3/4 B; sum over every node where phi or
  // D phi is nonzero.
  double lhs = 0.0;
  double osc = 0.0;
  double src = 0.0;
  for (std::size_t node = 0; node < v.size(); ++node) {
    const double ph = phi[node];
    const double dp2 = dphi[node].squaredNorm();
    if (ph == 0.0 && dp2 == 0.0) continue;
    if ((ph != 0.0 && !df.valid[node]) || !f.valid[node] || !dphi.valid[node]) {
      throw PreconditionError("energy audit ball reaches outside the interior-valid region");
    }
    ++r.nodes;
    lhs += diffops::frobenius_sq(df[node]) * ph * ph;
    osc += (f[node] - cv).squaredNorm() * dp2;
    const double q = dv[node].squaredNorm() + s.eps;
    src += std::pow(q, s.beta) * (g[node] - v[node]) * (g[node] - v[node]) * ph * ph;
  }
  const double vol = grid.cell_volume();
  lhs *= vol;
  osc *= vol;
  src *= vol;
  const double rhs = r.constants.c_sharp * (osc + src);
  r.worst = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
  r.worst_location = ball.center;
  r.worst_node = nearest_node(grid, ball.center);
  r.passed = r.worst <= 1.0;
  r.violations = r.passed ? 0 : 1;
  r.metrics = {{"lhs", lhs}, {"oscillation", osc}, {"source", src}, {"rhs", rhs}, {"ratio", r.worst}};
  add_coordinates(r.columns, n);
  r.columns.insert(r.columns.end(), {"radius", "lhs", "oscillation", "source", "rhs", "ratio"});
  push_row(r, ball.center, {ball.radius, lhs, osc, src, rhs, r.worst});
  return r;
}

std::vector<BallRegion> make_ball_family(const GridSpec& grid, const BallFamilyOptions& options) {
  if (!(options.max_radius > 0.0)) throw PreconditionError("ball family needs a positive radius");
  const int n = grid.dimension();
  const double min_radius = options.min_radius_spacings * grid.max_spacing();
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);

  auto fits = [&](const BallRegion& b) {
    try {
      require_inside(grid, b.scaled(0.75));
      return true;
    } catch (const PreconditionError&) {
      return false;
    }
  };

  std::vector<BallRegion> family;
  for (double r = options.max_radius; r >= min_radius; r *= 0.5) {
    BallRegion b{options.center, r, 1.0};
    if (fits(b)) family.push_back(b);
    const int kz = n == 3 ? 1 : 0;
    for (int k = -kz; k <= kz; ++k)
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) {
          BallRegion lb{options.center, r, 1.0};
          const int offs[3] = {i, j, k};
          for (int a = 0; a < n; ++a) lb.center[a] += (offs[a] + jitter(rng)) * r;
          if (fits(lb)) family.push_back(lb);
        }
  }
  return family;
}

namespace {

struct ReverseHolderData {
  VectorField du;
  VectorField f;
  MatrixField df;
};

double power_mean(const std::vector<double>& values, double exponent) {
  double s = 0.0;
  for (double x : values) s += std::pow(x, exponent);
  return std::pow(s / static_cast<double>(values.size()), 1.0 / exponent);
}

BallRatio ball_ratio(const ReverseHolderData& d, const ScalarField& src, double beta, double delta,
                     const BallRegion& ball) {
  const GridSpec& grid = d.df.grid;
  const BallRegion inner = ball.scaled(0.25);
  const BallRegion outer = ball.scaled(0.75);
  require_inside(grid, outer);
  const auto in_nodes = ball_nodes(grid, inner);
  const auto out_nodes = ball_nodes(grid, outer);
  if (in_nodes.empty() || out_nodes.empty()) throw PreconditionError("ball too small for the grid");
  require_valid(d.df, out_nodes, "reverse Hoelder ball");

  const double q = 2.0 + delta;
  std::vector<double> vals;
  for (auto node : in_nodes) vals.push_back(d.df[node].norm());
  BallRatio br;
  br.ball = ball;
  br.lhs = power_mean(vals, q);

  Vec mean = Vec::Zero();
  for (auto node : out_nodes) mean += d.f[node];
  mean /= static_cast<double>(out_nodes.size());
  double osc = 0.0;
  for (auto node : out_nodes) osc += (d.f[node] - mean).squaredNorm();
  br.oscillation = std::sqrt(osc / static_cast<double>(out_nodes.size())) / ball.radius;

  vals.clear();
  for (auto node : out_nodes) vals.push_back(std::pow(d.du[node].norm(), beta) * std::abs(src[node]));
  br.source = power_mean(vals, q);
  const double rhs = br.oscillation + br.source;
  br.ratio = rhs > 0.0 ? br.lhs / rhs : (br.lhs > 0.0 ? INFINITY : 0.0);
  return br;
}

ReverseHolderData reverse_holder_data(const ScalarField& u, double beta) {
  if (!(beta >= 0.0)) throw PreconditionError("reverse Hoelder audit needs beta >= 0");
  ReverseHolderData d{diffops::gradient(u), diffops::stretched_gradient(u, {beta, 0.0}), MatrixField(u.grid, Mat::Zero())};
  d.df = diffops::jacobian(d.f);
  return d;
}

void evaluate(const ReverseHolderData& d, const ScalarField& f, double beta, double delta,
              const std::vector<BallRegion>& balls, GehringResult& out) {
  out.table.clear();
  out.worst_ratio = 0.0;
  for (const auto& b : balls) {
    out.table.push_back(ball_ratio(d, f, beta, delta, b));
    out.worst_ratio = std::max(out.worst_ratio, out.table.back().ratio);
  }
  out.searched.push_back(delta);
  out.delta = delta;
}

}  // namespace

GehringResult reverse_holder_audit(const ScalarField& u, const ScalarField& f, double beta, double delta,
                                   const std::vector<BallRegion>& balls) {
  require_same_grid(u.grid, f.grid);
  if (balls.empty()) throw PreconditionError("empty ball family");
  if (!(delta >= 0.0)) throw PreconditionError("delta must be nonnegative");
  const ReverseHolderData d = reverse_holder_data(u, beta);
  GehringResult out;
  out.balls = balls;
  evaluate(d, f, beta, delta, balls, out);
  return out;
}

GehringResult gehring_delta_search(const ScalarField& u, const ScalarField& f, double beta,
                                   const std::vector<BallRegion>& balls, double c_target, double resolution) {
  require_same_grid(u.grid, f.grid);
  if (balls.empty()) throw PreconditionError("empty ball family");
  if (!(c_target > 0.0)) throw PreconditionError("Gehring budget must be positive");
  if (!(resolution > 0.0)) throw PreconditionError("delta resolution must be positive");
  const ReverseHolderData d = reverse_holder_data(u, beta);
  GehringResult out;
  out.balls = balls;
  out.c_target = c_target;

  auto passes = [&](double delta) {
    evaluate(d, f, beta, delta, balls, out);
    return out.worst_ratio <= c_target;
  };
  if (!passes(0.0)) {
    out.found = false;
    return out;
  }
  if (passes(2.0)) return out;
  double lo = 0.0;
  double hi = 2.0;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (out.delta != lo) {
    passes(lo);
    out.searched.pop_back();
  }
  return out;
}

}  // namespace pxlab::estimates
