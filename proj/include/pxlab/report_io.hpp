#pragma once

// CSV and JSON serialization of solutions and audit reports.
//
// Numbers are written with "%.17g" so that reruns are byte-identical and
// values round-trip exactly. Every report row starts with the parameter
// tuple audit,n,t_minus,t_plus,beta,eps,h.

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "pxlab/config.hpp"
#include "pxlab/run.hpp"

namespace pxlab::report_io {

std::string format_number(double x);

/// Columns x1,x2[,x3],value in node order.
void write_field_csv(std::ostream& out, const ScalarField& field);
/// Reads a file written by write_field_csv back onto `grid`.
ScalarField read_field_csv(const std::string& path, const GridSpec& grid);

void write_continuation_csv(std::ostream& out, const config::RunConfig& cfg, const theory::ExponentWindow& w,
                            const solver::ContinuationResult& solve);
/// Rows of every report whose audit name matches; false if there were none.
bool write_reports_csv(std::ostream& out, const std::vector<estimates::EstimateReport>& reports,
                       const std::string& audit);
void write_gehring_csv(std::ostream& out, const std::string& audit, int n, const theory::ExponentWindow& w,
                       double eps, double h, const std::vector<run::GehringRun>& runs);

nlohmann::ordered_json config_json(const config::RunConfig& cfg);
nlohmann::ordered_json solve_json(const solver::ContinuationResult& solve);
nlohmann::ordered_json report_json(const estimates::EstimateReport& r);
nlohmann::ordered_json gehring_json(const run::GehringRun& g);

/// Writes solution.csv, continuation.csv, one CSV per audit and
/// summary.json into `directory`, honouring the configured formats.
/// `audits` may be null for a solve-only run.
void write_outputs(const std::string& directory, const std::string& command, const config::RunConfig& cfg,
                   const solver::ContinuationResult& solve, const run::AuditRun* audits);

}  // namespace pxlab::report_io
