#pragma once

// Configuration-driven pipelines shared by the command-line tool and the
// acceptance suite.

#include <vector>

#include "pxlab/config.hpp"
#include "pxlab/estimates.hpp"
#include "pxlab/solver.hpp"

namespace pxlab::run {

/// Continuation over the configured eps schedule.
solver::ContinuationResult run_solve(const config::RunConfig& cfg);

/// Wraps a stored solution as a one-step run at the last configured eps.
solver::ContinuationResult from_stored(const config::RunConfig& cfg, const ScalarField& v);

struct GehringRun {
  double beta = 0.0;
  estimates::GehringResult result;
};

struct AuditRun {
  theory::ExponentWindow window;
  std::vector<estimates::EstimateReport> reports;
  std::vector<GehringRun> reverse_holder;
  std::vector<GehringRun> gehring;
  bool passed = true;
};

std::vector<BallRegion> ball_family(const config::RunConfig& cfg);

/// Source term of the limit equation at the last solve: g - v.
ScalarField effective_source(const solver::SolveResult& r);

/// Every configured audit. Pointwise and energy audits run for each beta and
/// each eps of the schedule; the others use the last (smallest eps) solve.
AuditRun run_audits(const config::RunConfig& cfg, const solver::ContinuationResult& solve);

/// Only the delta search, for each beta.
AuditRun run_gehring(const config::RunConfig& cfg, const solver::ContinuationResult& solve);

}  // namespace pxlab::run
