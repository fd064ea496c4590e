#include "pxlab/run.hpp"

namespace pxlab::run {

solver::ContinuationResult run_solve(const config::RunConfig& cfg) {
  return solver::epsilon_continuation(cfg.problem(0), cfg.eps, cfg.solve, cfg.mollify == config::MollifyMode::Tied);
}

solver::ContinuationResult from_stored(const config::RunConfig& cfg, const ScalarField& v) {
  const std::size_t last = cfg.eps.size() - 1;
  const solver::ProblemSpec spec = cfg.problem(last);
  if (!(v.grid == spec.grid)) throw PreconditionError("stored solution does not match the configured grid");
  solver::ContinuationResult out;
  out.schedule = {cfg.eps[last]};
  out.ball = solver::central_ball(spec.grid);
  solver::SolveResult r{v, solver::prepare(spec)};
  r.residual = solver::equation_residual(v, r.data, spec.eps);
  for (double x : r.data.g.values) r.g_norm = std::max(r.g_norm, std::abs(x));
  r.converged = true;
  out.solves.push_back(std::move(r));
  return out;
}

std::vector<BallRegion> ball_family(const config::RunConfig& cfg) {
  const GridSpec grid = cfg.grid();
  estimates::BallFamilyOptions opt;
  opt.center = cfg.ball_center();
  opt.max_radius = cfg.family_radius > 0.0 ? cfg.family_radius : 0.4 * grid.min_width();
  opt.seed = cfg.seed;
  return estimates::make_ball_family(grid, opt);
}

ScalarField effective_source(const solver::SolveResult& r) {
  ScalarField f(r.v.grid, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = r.data.g[i] - r.v[i];
  return f;
}

namespace {

void finish(AuditRun& out) {
  out.passed = true;
  for (const auto& r : out.reports) out.passed = out.passed && r.passed;
  for (const auto& g : out.gehring) out.passed = out.passed && g.result.found;
}

void add_gehring(const config::RunConfig& cfg, const solver::ContinuationResult& solve, AuditRun& out) {
  const solver::SolveResult& last = solve.solves.back();
  const ScalarField f = effective_source(last);
  const auto balls = ball_family(cfg);
  for (std::size_t b = 0; b < cfg.betas.size(); ++b) {
    out.gehring.push_back(
        {cfg.betas[b], estimates::gehring_delta_search(last.v, f, cfg.betas[b], balls, cfg.budget_for(b))});
  }
}

}  // namespace

AuditRun run_audits(const config::RunConfig& cfg, const solver::ContinuationResult& solve) {
  if (solve.solves.empty()) throw PreconditionError("no solve to audit");
  AuditRun out;
  out.window = config::sampled_window(cfg);
  const solver::SolveResult& last = solve.solves.back();
  const int n = cfg.dimension;

  for (double beta : cfg.betas) {
    if (cfg.wants("pointwise")) {
      estimates::PointwiseOptions opt;
      opt.kappa = cfg.kappa;
      for (std::size_t k = 0; k < solve.solves.size(); ++k) {
        const auto& r = solve.solves[k];
        out.reports.push_back(
            estimates::pointwise_sigma2_audit(r.v, r.data.p, r.data.g, {beta, solve.schedule[k]}, out.window, opt));
      }
    }
    if (cfg.wants("quasiregularity")) {
      estimates::QuasiregularityOptions opt;
      opt.bound = theory::constant_set(out.window, n, beta).c_star;
      auto rep = estimates::quasiregularity_audit(last.v, beta, opt);
      rep.window = out.window;
      rep.eps = solve.schedule.back();
      rep.constants = theory::constant_set(out.window, n, beta);
      rep.has_constants = true;
      out.reports.push_back(std::move(rep));
    }
    if (cfg.wants("caccioppoli")) {
      for (std::size_t k = 0; k < solve.solves.size(); ++k) {
        const auto& r = solve.solves[k];
        for (double radius : cfg.radii) {
          out.reports.push_back(estimates::caccioppoli_audit(r.v, r.data.g, {beta, solve.schedule[k]}, out.window,
                                                             BallRegion{cfg.ball_center(), radius, 1.0}));
        }
      }
    }
  }
  if (cfg.wants("reverse_holder")) {
    const ScalarField f = effective_source(last);
    const auto balls = ball_family(cfg);
    for (double beta : cfg.betas) {
      out.reverse_holder.push_back({beta, estimates::reverse_holder_audit(last.v, f, beta, cfg.delta, balls)});
    }
  }
  if (cfg.wants("gehring")) add_gehring(cfg, solve, out);
  finish(out);
  return out;
}

AuditRun run_gehring(const config::RunConfig& cfg, const solver::ContinuationResult& solve) {
  if (solve.solves.empty()) throw PreconditionError("no solve to audit");
  AuditRun out;
  out.window = config::sampled_window(cfg);
  add_gehring(cfg, solve, out);
  finish(out);
  return out;
}

}  // namespace pxlab::run
