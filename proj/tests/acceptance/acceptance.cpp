// Acceptance suite: one pass/fail line per criterion, exit status 0 only if
// every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pxlab/config.hpp"
#include "pxlab/identity_suite.hpp"
#include "pxlab/report_io.hpp"
#include "pxlab/run.hpp"

using namespace pxlab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

expr::Expression parse2(const std::string& s) { return expr::parse_expression(s, 2); }

double max_error(const ScalarField& v, const expr::Expression& exact) {
  const ScalarField e = sample(exact, v.grid);
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i] - e[i]));
  return m;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The fixture pipeline exactly as the audit command runs it.
struct FixtureRun {
  config::RunConfig cfg;
  solver::ContinuationResult solve;
  run::AuditRun audits;
  double seconds = 0.0;
};

FixtureRun run_fixture(const std::string& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  FixtureRun f{config::load_config(std::string(PXLAB_FIXTURES) + "/fixture.cfg"), {}, {}};
  f.solve = run::run_solve(f.cfg);
  f.audits = run::run_audits(f.cfg, f.solve);
  report_io::write_outputs(dir, "audit", f.cfg, f.solve, &f.audits);
  f.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return f;
}

std::size_t schedule_index(const solver::ContinuationResult& s, double eps) {
  for (std::size_t k = 0; k < s.schedule.size(); ++k)
    if (s.schedule[k] == eps) return k;
  throw Error("fixture schedule lacks eps " + fmt("%g", eps));
}

Outcome identities() {
  const theory::IdentitySuiteResult r = theory::run_identity_suite({});
  Outcome o;
  o.passed = r.sigma2_worst <= 1e-9 && r.lemma21_worst <= 1e-9 && r.inequality_worst >= -1e-9 &&
             r.polynomials == 100 && r.inequality_checks >= 10000;
  o.detail = "sigma2 " + fmt("%.3g", r.sigma2_worst) + ", n=2 equality " + fmt("%.3g", r.lemma21_worst) +
             ", n=3 inequality min " + fmt("%.3g", r.inequality_worst) + " over " +
             std::to_string(r.inequality_checks) + " points";
  return o;
}

Outcome constants() {
  bool ok = true;
  for (double t : {1.1, 2.0, 5.0, 10.0}) ok = ok && theory::beta_star(2, t) == -1.0;
  double worst_zero = 0.0;
  for (int n : {3, 4, 5}) worst_zero = std::max(worst_zero, std::abs(theory::beta_star(n, 3.0 + 2.0 / (n - 2))));
  ok = ok && worst_zero <= 1e-15;

  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dim(2, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const int n = dim(rng);
    const double tm = 1.01 + 6.0 * u(rng);
    const double tp = tm + 5.0 * u(rng);
    const double bs = -1.0 + (n - 2) * (tp - 1.0) / (2.0 * (n - 1));
    const double beta = bs + 1e-6 + 4.0 * u(rng);
    const double eta = theory::eta_star({tm, tp}, n, beta);
    const double cap = beta >= 0.0 ? 0.5 : 0.5 * std::min(1.0 + beta, (n - 1) / (-2.0 * beta) * (beta - bs));
    const double mq = std::max((tm - 2) * (tm - 2), (tp - 2) * (tp - 2));
    const bool a = eta > 0.0 && eta < cap;
    const bool b = eta * mq < 0.5 * (n - 1) * (tm - 1) * (beta - bs);
    if (!a || !b) ++violations;
  }
  Outcome o;
  o.passed = ok && violations == 0;
  o.detail = "beta_star zero residual " + fmt("%.3g", worst_zero) + ", eta_star violations " +
             std::to_string(violations) + "/1000";
  return o;
}

Outcome solver_order() {
  // Constant exponent: the scheme is exact on quadratics, so the error is
  // round-off at both resolutions.
  const expr::Expression quad = parse2("x1^2 - 0.5*x1*x2 + 2*x2^2");
  double quad_err[2];
  // Variable exponent with a smooth manufactured solution.
  const expr::Expression vstar = parse2("sin(x1)*cos(x2)");
  const expr::Expression p = parse2("2 + 0.5*sin(x1)");
  const expr::Expression f = solver::manufactured_rhs(vstar, p, 1e-2);
  double err[2];
  int k = 0;
  for (int m : {33, 65}) {
    const GridSpec g = GridSpec::cube(2, -0.5, 0.5, m);
    const solver::ProblemSpec qs{g, parse2("2"), solver::manufactured_rhs(quad, parse2("2"), 1e-2), quad, 1e-2, 0.0};
    quad_err[k] = max_error(solver::solve_regularized(qs, {}).v, quad);
    const solver::ProblemSpec vs{g, p, f, vstar, 1e-2, 0.0};
    const solver::SolveResult r = solver::solve_regularized(vs, {});
    err[k] = r.converged ? max_error(r.v, vstar) : INFINITY;
    ++k;
  }
  const double ratio = err[0] / err[1];
  Outcome o;
  o.passed = quad_err[0] <= 1e-10 && quad_err[1] <= 1e-10 && ratio >= 3.2 && ratio <= 4.8;
  o.detail = "p=2 quadratic errors " + fmt("%.2e, %.2e", quad_err[0], quad_err[1]) + "; p(x) errors " +
             fmt("%.3e, %.3e", err[0], err[1]) + " ratio " + fmt("%.3f", ratio);
  return o;
}

Outcome linear_exactness() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst_res = 0.0;
  double worst_err = 0.0;
  bool converged = true;
  for (int k = 0; k < 3; ++k) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g*x1 + %.17g*x2", u(rng), u(rng));
    const solver::ProblemSpec spec{GridSpec::cube(2, -0.5, 0.5, 65), parse2("2 + 0.5*sin(x1)"), parse2("0"),
                                   parse2(buf), 1e-2, 0.0};
    const solver::SolveResult r = solver::solve_regularized(spec, {});
    converged = converged && r.converged;
    worst_res = std::max(worst_res, r.residual);
    worst_err = std::max(worst_err, max_error(r.v, spec.boundary));
  }
  Outcome o;
  o.passed = converged && worst_res < 1e-10;
  o.detail = "max residual " + fmt("%.3g", worst_res) + ", max error " + fmt("%.3g", worst_err);
  return o;
}

Outcome pointwise(const FixtureRun& f) {
  bool ok = f.cfg.grid().max_spacing() == 1.0 / 64 && f.cfg.grid().min_width() == 1.0;
  double worst = -INFINITY;
  int audited = 0;
  for (double beta : {0.0, 1.0}) {
    for (double eps : {1e-2, 1e-3}) {
      const auto& r = f.solve.solves[schedule_index(f.solve, eps)];
      estimates::PointwiseOptions opt;
      opt.kappa = 10.0;
      const auto rep = estimates::pointwise_sigma2_audit(r.v, r.data.p, r.data.g, {beta, eps}, f.audits.window, opt);
      ok = ok && rep.passed;
      worst = std::max(worst, rep.worst);
      ++audited;
    }
  }
  Outcome o;
  o.passed = ok && audited == 4;
  o.detail = "worst residual / (kappa h^2 (1 + |DF|^2)) = " + fmt("%.4g", worst);
  return o;
}

Outcome quasiregularity(const FixtureRun& f) {
  const config::RunConfig saddle = config::load_config(std::string(PXLAB_FIXTURES) + "/saddle.cfg");
  const auto s = run::run_solve(saddle);
  const auto rep = estimates::quasiregularity_audit(s.solves.back().v, 0.0);
  const bool saddle_ok = std::abs(rep.worst - 2.0) <= 1e-9 && rep.violations == 0;
  bool ok = saddle_ok;
  std::string detail = "saddle K " + fmt("%.12f", rep.worst);
  for (double beta : {0.0, 1.0}) {
    const double c_star = theory::constant_set(f.audits.window, 2, beta).c_star;
    estimates::QuasiregularityOptions opt;
    opt.bound = c_star;
    const auto r = estimates::quasiregularity_audit(f.solve.solves.back().v, beta, opt);
    ok = ok && r.passed;
    detail += fmt("; beta %g: sup K %.4g", beta, r.worst) + fmt(" <= C* %.4g", c_star);
  }
  return {ok, detail};
}

Outcome caccioppoli(const FixtureRun& f) {
  bool ok = true;
  double worst = 0.0;
  int audited = 0;
  for (double beta : {0.0, 1.0}) {
    for (std::size_t k = 0; k < f.solve.solves.size(); ++k) {
      const auto& r = f.solve.solves[k];
      for (double radius : {0.1, 0.15, 0.2, 0.25, 0.3}) {
        const auto rep = estimates::caccioppoli_audit(r.v, r.data.g, {beta, f.solve.schedule[k]}, f.audits.window,
                                                      BallRegion{Vec::Zero(), radius, 1.0});
        ok = ok && rep.passed;
        worst = std::max(worst, rep.worst);
        ++audited;
      }
    }
  }
  Outcome o;
  o.passed = ok;
  o.detail = std::to_string(audited) + " balls, worst LHS/RHS " + fmt("%.4g", worst);
  return o;
}

Outcome gehring(const FixtureRun& f) {
  bool ok = !f.audits.gehring.empty();
  std::string detail;
  for (const auto& g : f.audits.gehring) {
    ok = ok && g.result.found && g.result.delta >= 0.05;
    if (!detail.empty()) detail += "; ";
    detail += fmt("beta %g: delta %.4g", g.beta, g.result.delta) + fmt(" (budget %.6g, worst ratio %.6g)",
                                                                         g.result.c_target, g.result.worst_ratio);
  }
  return {ok, detail};
}

Outcome determinism(const std::filesystem::path& a, const std::filesystem::path& b) {
  namespace fs = std::filesystem;
  std::size_t files = 0;
  std::size_t differing = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    if (slurp(entry.path()) != slurp(b / entry.path().filename())) ++differing;
  }
  std::size_t files_b = 0;
  for (const auto& entry : fs::directory_iterator(b))
    if (entry.path().extension() == ".csv") ++files_b;
  return {files > 0 && files == files_b && differing == 0,
          std::to_string(files) + " CSV files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  namespace fs = std::filesystem;
  const fs::path work = fs::temp_directory_path() / "pxlab_acceptance";
  fs::remove_all(work);

  int failures = 0;
  auto report = [&](int id, const char* name, double limit, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = sec < limit;
    const bool pass = o.passed && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %d %-18s %s (%.2f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), sec,
                limit, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  };

  report(1, "identities", 10, identities);
  report(2, "constants", 1, constants);
  report(3, "solver-order", 60, solver_order);
  report(4, "linear-exactness", 10, linear_exactness);

  FixtureRun first;
  bool have_fixture = false;
  try {
    first = run_fixture((work / "run1").string());
    have_fixture = true;
    std::printf("       fixture pipeline %.2f s\n", first.seconds);
  } catch (const std::exception& e) {
    std::printf("       fixture pipeline failed: %s\n", e.what());
  }
  // The fixture solve is shared; its time counts against every audit below.
  const double shared = have_fixture ? first.seconds : 0.0;
  auto on_fixture = [&](int id, const char* name, double limit, Outcome (*body)(const FixtureRun&)) {
    report(id, name, limit - shared, [&]() -> Outcome {
      if (!have_fixture) return {false, "fixture pipeline failed"};
      return body(first);
    });
  };
  on_fixture(5, "pointwise-sigma2", 120, pointwise);
  on_fixture(6, "quasiregularity", 120, quasiregularity);
  on_fixture(7, "caccioppoli", 60, caccioppoli);
  on_fixture(8, "gehring", 120, gehring);
  report(9, "determinism", INFINITY, [&]() -> Outcome {
    if (!have_fixture) return {false, "fixture pipeline failed"};
    run_fixture((work / "run2").string());
    return determinism(work / "run1", work / "run2");
  });

  std::printf("%d of 9 criteria failed\n", failures);
  fs::remove_all(work);
  return failures == 0 ? 0 : 1;
}
