#pragma once

// Run configuration: an INI-like text format.
//
//   file    := (blank | comment | section | entry)*
//   section := '[' name ']'
//   entry   := key '=' value (',' value)*
//   value   := number | word | '"' text '"'
//   comment := '#' text            (anywhere outside quotes)
//
// Sections and keys:
//   [problem]  dimension, lower, upper, points, p, f, boundary, eps, mollify
//   [solver]   tolerance, max_iterations, damping
//   [audit]    audits, beta, kappa, center, radii, delta, gehring_budget,
//              family_radius, seed
//   [output]   directory, formats
//
// lower, upper and points take one value for every axis or one per axis.
// mollify is yes (radius tied to eps), no, or a fixed radius.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pxlab/grid.hpp"
#include "pxlab/solver.hpp"

namespace pxlab::config {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

enum class MollifyMode { Tied, Off, Fixed };

inline constexpr const char* kAuditNames[] = {"pointwise", "quasiregularity", "caccioppoli", "reverse_holder",
                                              "gehring"};

struct RunConfig {
  int dimension = 2;
  std::vector<double> lower{-0.5};
  std::vector<double> upper{0.5};
  std::vector<int> points{65};
  std::string p = "2";
  std::string f = "0";
  std::string boundary = "0";
  std::vector<double> eps{1e-2};
  MollifyMode mollify = MollifyMode::Tied;
  double mollify_radius = 0.0;

  solver::SolveOptions solve;

  std::vector<std::string> audits;
  std::vector<double> betas{0.0};
  double kappa = 10.0;
  std::vector<double> center;
  std::vector<double> radii;
  double delta = 0.0;
  std::vector<double> gehring_budget;
  double family_radius = 0.0;
  std::uint64_t seed = 1;

  std::string output_directory = "pxlab-out";
  std::vector<std::string> formats{"csv", "json"};

  /// "section.key" -> line where it was set.
  std::map<std::string, int> key_lines;

  GridSpec grid() const;
  /// Problem at eps[index] with the configured mollification.
  solver::ProblemSpec problem(std::size_t index) const;
  double radius_for(double eps) const;
  bool wants(std::string_view audit) const;
  bool wants_format(std::string_view format) const;
  Vec ball_center() const;
  /// Budget for betas[index]; a single budget applies to every beta.
  double budget_for(std::size_t index) const;
};

/// Parses and validates; errors carry the 1-based line number (0 when the
/// problem is not tied to a line).
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Checks that needs the grid: expressions parse and evaluate, the sampled
/// exponent window is admissible for every beta, balls fit. Called by
/// parse_config.
void validate(const RunConfig& cfg);

/// Window of the raw sampled exponent.
theory::ExponentWindow sampled_window(const RunConfig& cfg);

}  // namespace pxlab::config
