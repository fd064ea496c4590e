#include <gtest/gtest.h>

#include <cmath>

#include "pxlab/estimates.hpp"
#include "pxlab/identity_suite.hpp"
#include "pxlab/solver.hpp"

using namespace pxlab;
using namespace pxlab::estimates;

namespace {

expr::Expression parse2(const std::string& src) { return expr::parse_expression(src, 2); }

ScalarField sampled(const std::string& src, const GridSpec& g) { return sample(parse2(src), g); }

const GridSpec& unit_grid() {
  static const GridSpec g = GridSpec::cube(2, -0.5, 0.5, 33);
  return g;
}

solver::SolveResult fixture_solve(double eps, const std::string& p = "2 + 0.5*sin(x1)") {
  const solver::ProblemSpec spec{unit_grid(), parse2(p), parse2("0"), parse2("exp(x1)*cos(x2)"), eps, 0.0};
  solver::SolveResult r = solver::solve_regularized(spec, {});
  EXPECT_TRUE(r.converged);
  return r;
}

ScalarField source_of(const solver::SolveResult& r) {
  ScalarField f(r.v.grid, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = r.data.g[i] - r.v[i];
  return f;
}

}  // namespace

TEST(Pointwise, LinearHoldsWithEquality) {
  const ScalarField v = sampled("0.3*x1 - 0.8*x2", unit_grid());
  const EstimateReport r = pointwise_sigma2_audit(v, ScalarField(unit_grid(), 2.0), v, {0.0, 1e-2}, {2.0, 2.0});
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.metric("max_lhs"), 0.0, 1e-20);
  EXPECT_NEAR(r.metric("max_residual"), 0.0, 1e-20);
  EXPECT_EQ(r.audit, "pointwise_sigma2");
  EXPECT_GT(r.nodes, 0u);
}

TEST(Pointwise, SaddleSlack) {
  const ScalarField v = sampled("x1^2 - x2^2", unit_grid());
  const EstimateReport r = pointwise_sigma2_audit(v, ScalarField(unit_grid(), 2.0), v, {0.0, 1e-2}, {2.0, 2.0});
  EXPECT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.constants.c_star, 20.0);
  EXPECT_NEAR(r.metric("max_lhs"), 8.0, 1e-9);
  const std::size_t lhs = 2;
  const std::size_t sig = 3;
  const std::size_t res = 5;
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row[lhs], 8.0, 1e-9);
    EXPECT_NEAR(row[sig], 4.0, 1e-9);
    EXPECT_NEAR(row[res], -72.0, 1e-8);
  }
  EXPECT_EQ(r.columns[res], "residual");
}

TEST(Pointwise, RefusesNonSolution) {
  const ScalarField v = sampled("x1^2", unit_grid());
  EXPECT_THROW(
      pointwise_sigma2_audit(v, ScalarField(unit_grid(), 2.0), ScalarField(unit_grid(), 0.0), {0.0, 1e-2}, {2.0, 2.0}),
      AuditError);
  EXPECT_THROW(pointwise_sigma2_audit(v, ScalarField(unit_grid(), 2.0), v, {0.0, 0.0}, {2.0, 2.0}), PreconditionError);
}

TEST(Pointwise, SolverOutputPasses) {
  const auto s = fixture_solve(1e-3);
  for (double beta : {0.0, 1.0}) {
    const EstimateReport r = pointwise_sigma2_audit(s.v, s.data.p, s.data.g, {beta, 1e-3}, s.data.window);
    EXPECT_TRUE(r.passed) << "beta " << beta << " worst " << r.worst;
    EXPECT_EQ(r.worst_location, unit_grid().coordinates(r.worst_node));
    EXPECT_GE(unit_grid().boundary_distance(r.worst_node), 2);
  }
}

TEST(Pointwise, DiscreteQuantitiesConvergeAtSecondOrder) {
  const expr::Expression vstar = parse2("sin(x1)*cos(x2)");
  const expr::Expression p = parse2("2 + 0.5*sin(x1)");
  const diffops::StretchParams s{1.0, 1e-2};
  const expr::Expression g = solver::manufactured_rhs(vstar, p, s.eps, true);
  const theory::SymbolicStretch sym(vstar, s);
  double err[2];
  int k = 0;
  for (int m : {33, 65}) {
    const GridSpec grid = GridSpec::cube(2, -0.5, 0.5, m);
    PointwiseOptions o;
    o.equation_tolerance = 1e-2;
    const EstimateReport r = pointwise_sigma2_audit(sample(vstar, grid), sample(p, grid), sample(g, grid), s,
                                                    {1.5, 2.5}, o);
    double e = 0.0;
    for (const auto& row : r.rows) {
      const double x[2] = {row[0], row[1]};
      const Mat df = sym.jacobian(x);
      e = std::max(e, std::abs(row[2] - diffops::frobenius_sq(df)));
      e = std::max(e, std::abs(row[3] - diffops::sigma2(df, 2)));
    }
    err[k++] = e;
  }
  EXPECT_GE(err[0] / err[1], 3.0);
  EXPECT_LE(err[0] / err[1], 5.0);
}

TEST(Quasiregularity, SaddleDistortionIsTwo) {
  const EstimateReport r = quasiregularity_audit(sampled("x1^2 - x2^2", unit_grid()), 0.0);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.worst, 2.0, 1e-10);
  for (const auto& row : r.rows) EXPECT_NEAR(row[4], 2.0, 1e-10);
  EXPECT_LT(r.metric("sigma2_det_consistency"), 1e-15);
}

TEST(Quasiregularity, LinearIsVacuous) {
  QuasiregularityOptions o;
  o.bound = 1.0;
  const EstimateReport r = quasiregularity_audit(sampled("2*x1 + x2", unit_grid()), 1.0, o);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.metric("below_floor"), static_cast<double>(r.nodes));
}

TEST(Quasiregularity, BoundAndRegion) {
  QuasiregularityOptions o;
  o.bound = 1.5;
  EXPECT_FALSE(quasiregularity_audit(sampled("x1^2 - x2^2", unit_grid()), 0.0, o).passed);
  o.bound = std::nullopt;
  o.region = BallRegion{Vec::Zero(), 0.2, 1.0};
  const EstimateReport r = quasiregularity_audit(sampled("x1^2 - x2^2", unit_grid()), 0.0, o);
  EXPECT_LT(r.nodes, 200u);
  o.region = BallRegion{Vec(0.45, 0, 0), 0.2, 1.0};
  EXPECT_THROW(quasiregularity_audit(sampled("x1^2 - x2^2", unit_grid()), 0.0, o), PreconditionError);
  EXPECT_THROW(quasiregularity_audit(sampled("x1", unit_grid()), -0.5), PreconditionError);
}

TEST(Quasiregularity, ConvexFunctionViolates) {
  const EstimateReport r = quasiregularity_audit(sampled("x1^2 + x2^2", unit_grid()), 0.0);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.violations, r.nodes);
  EXPECT_TRUE(std::isinf(r.worst));
}

TEST(Quasiregularity, ConstantExponentLimitBelowCStar) {
  const solver::ProblemSpec spec{unit_grid(), parse2("2.5"), parse2("0"), parse2("exp(x1)*cos(x2)"), 1e-1, 0.0};
  const auto c = solver::epsilon_continuation(spec, {1e-1, 1e-2, 1e-3, 1e-4}, {});
  const double c_star = theory::constant_set({2.5, 2.5}, 2, 0.0).c_star;
  QuasiregularityOptions o;
  o.bound = c_star;
  const EstimateReport r = quasiregularity_audit(c.solves.back().v, 0.0, o);
  EXPECT_TRUE(r.passed) << r.worst << " vs " << c_star;
}

TEST(Quasiregularity, SigmaTwoMatchesMinusDetOnSolverOutput) {
  const auto s = fixture_solve(1e-2);
  for (double beta : {0.0, 1.0}) {
    EXPECT_LT(quasiregularity_audit(s.v, beta).metric("sigma2_det_consistency"), 1e-14);
  }
}

TEST(Caccioppoli, LinearHasZeroLhs) {
  const ScalarField v = sampled("x1 - x2", unit_grid());
  const EstimateReport r = caccioppoli_audit(v, v, {0.0, 1e-2}, {2.0, 2.0}, BallRegion{Vec::Zero(), 0.3, 1.0});
  EXPECT_EQ(r.metric("lhs"), 0.0);
  EXPECT_TRUE(r.passed);
}

TEST(Caccioppoli, MeanMinimizesOscillation) {
  const auto s = fixture_solve(1e-2);
  const BallRegion b{Vec(0.05, -0.05, 0), 0.3, 1.0};
  const diffops::StretchParams p{1.0, 1e-2};
  const EstimateReport mean = caccioppoli_audit(s.v, s.data.g, p, s.data.window, b);
  const EstimateReport zero = caccioppoli_audit(s.v, s.data.g, p, s.data.window, b, Vec::Zero());
  EXPECT_LE(mean.metric("rhs"), zero.metric("rhs"));
  EXPECT_EQ(mean.metric("lhs"), zero.metric("lhs"));
}

TEST(Caccioppoli, ShiftInvariant) {
  const auto s = fixture_solve(1e-2);
  ScalarField v = s.v;
  ScalarField g = s.data.g;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += 3.0;
    g[i] += 3.0;
  }
  const BallRegion b{Vec::Zero(), 0.25, 1.0};
  const diffops::StretchParams p{0.0, 1e-2};
  const double a = caccioppoli_audit(s.v, s.data.g, p, s.data.window, b).worst;
  const double c = caccioppoli_audit(v, g, p, s.data.window, b).worst;
  EXPECT_NEAR(a, c, 1e-10 * a);
}

TEST(Caccioppoli, SolverOutputRatioBelowOne) {
  const auto s = fixture_solve(1e-3);
  const EstimateReport r =
      caccioppoli_audit(s.v, s.data.g, {0.0, 1e-3}, s.data.window, BallRegion{Vec::Zero(), 0.3, 1.0});
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.metric("lhs"), 0.0);
  EXPECT_EQ(r.worst_node, unit_grid().index({16, 16, 0}));
}

TEST(Caccioppoli, DegenerateBall) {
  const ScalarField v = sampled("x1", unit_grid());
  EXPECT_THROW(caccioppoli_audit(v, v, {0.0, 1e-2}, {2.0, 2.0}, BallRegion{Vec::Zero(), 0.0, 1.0}), PreconditionError);
  EXPECT_THROW(caccioppoli_audit(v, v, {0.0, 1e-2}, {2.0, 2.0}, BallRegion{Vec::Zero(), 0.7, 1.0}), PreconditionError);
}

TEST(BallFamily, FitsAndHalves) {
  const GridSpec g = GridSpec::cube(2, -0.5, 0.5, 65);
  BallFamilyOptions o;
  const auto family = make_ball_family(g, o);
  ASSERT_FALSE(family.empty());
  EXPECT_EQ(family.front().radius, 0.4);
  EXPECT_EQ(family.front().center, Vec::Zero());
  double smallest = INFINITY;
  for (const auto& b : family) {
    EXPECT_NO_THROW(require_inside(g, b.scaled(0.75)));
    smallest = std::min(smallest, b.radius);
    EXPECT_GE(b.radius, 8.0 * g.max_spacing());
    const double k = std::log2(0.4 / b.radius);
    EXPECT_NEAR(k, std::round(k), 1e-12);
  }
  EXPECT_LT(smallest, 0.4);
  const auto again = make_ball_family(g, o);
  ASSERT_EQ(again.size(), family.size());
  for (std::size_t i = 0; i < family.size(); ++i) EXPECT_EQ(again[i].center, family[i].center);
  o.seed = 2;
  const auto other = make_ball_family(g, o);
  bool differs = other.size() != family.size();
  for (std::size_t i = 0; !differs && i < family.size(); ++i) differs = other[i].center != family[i].center;
  EXPECT_TRUE(differs);
}

TEST(ReverseHolder, LinearHasZeroLhs) {
  const ScalarField u = sampled("x1 + 2*x2", unit_grid());
  const auto balls = make_ball_family(unit_grid(), {});
  for (double delta : {0.0, 0.5, 2.0}) {
    const GehringResult r = reverse_holder_audit(u, ScalarField(unit_grid(), 0.0), 1.0, delta, balls);
    for (const auto& b : r.table) EXPECT_EQ(b.lhs, 0.0);
  }
  EXPECT_THROW(reverse_holder_audit(u, ScalarField(unit_grid(), 0.0), 1.0, 0.0, {}), PreconditionError);
}

TEST(ReverseHolder, SaddleRatioIndependentOfDelta) {
  const ScalarField u = sampled("x1^2 - x2^2", unit_grid());
  const ScalarField f(unit_grid(), 0.0);
  const auto balls = make_ball_family(unit_grid(), {});
  const GehringResult a = reverse_holder_audit(u, f, 0.0, 0.0, balls);
  const GehringResult b = reverse_holder_audit(u, f, 0.0, 1.3, balls);
  ASSERT_EQ(a.table.size(), b.table.size());
  for (std::size_t i = 0; i < a.table.size(); ++i) {
    EXPECT_NEAR(a.table[i].ratio, b.table[i].ratio, 1e-12 * a.table[i].ratio);
    EXPECT_TRUE(std::isfinite(a.table[i].ratio));
    EXPECT_NEAR(a.table[i].lhs, std::sqrt(8.0), 1e-9);
  }
}

TEST(Gehring, LinearGivesUpperEnd) {
  const ScalarField u = sampled("x1 + 2*x2", unit_grid());
  const GehringResult r =
      gehring_delta_search(u, ScalarField(unit_grid(), 0.0), 0.0, make_ball_family(unit_grid(), {}), 1.0);
  EXPECT_TRUE(r.found);
  EXPECT_EQ(r.delta, 2.0);
  EXPECT_EQ(r.searched.size(), 2u);
}

TEST(Gehring, ConstantHessianPlateau) {
  const ScalarField u = sampled("x1^2 - x2^2", unit_grid());
  const ScalarField f(unit_grid(), 0.0);
  const auto balls = make_ball_family(unit_grid(), {});
  const double worst = reverse_holder_audit(u, f, 0.0, 0.0, balls).worst_ratio;
  const GehringResult above = gehring_delta_search(u, f, 0.0, balls, 1.01 * worst);
  EXPECT_TRUE(above.found);
  EXPECT_EQ(above.delta, 2.0);
  const GehringResult below = gehring_delta_search(u, f, 0.0, balls, 0.99 * worst);
  EXPECT_FALSE(below.found);
  EXPECT_EQ(below.delta, 0.0);
}

TEST(Gehring, BisectionOnSolverOutput) {
  const auto s = fixture_solve(1e-3);
  const ScalarField f = source_of(s);
  const auto balls = make_ball_family(unit_grid(), {});
  const double at0 = reverse_holder_audit(s.v, f, 1.0, 0.0, balls).worst_ratio;
  const double at2 = reverse_holder_audit(s.v, f, 1.0, 2.0, balls).worst_ratio;
  ASSERT_LT(at0, at2);
  const double budget = 0.5 * (at0 + at2);
  const GehringResult r = gehring_delta_search(s.v, f, 1.0, balls, budget);
  EXPECT_TRUE(r.found);
  EXPECT_GE(r.delta, 0.0);
  EXPECT_LT(r.delta, 2.0);
  EXPECT_LE(r.worst_ratio, budget);
  EXPECT_GT(r.searched.size(), 10u);
  EXPECT_THROW(gehring_delta_search(s.v, f, 1.0, balls, 0.0), PreconditionError);
}
