// Command-line front end.
//
// Exit codes: 0 success, 1 audit failure, 2 configuration or parse error,
// 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pxlab/config.hpp"
#include "pxlab/identity_suite.hpp"
#include "pxlab/report_io.hpp"
#include "pxlab/run.hpp"

namespace {

using pxlab::report_io::format_number;

enum Exit { kOk = 0, kAuditFailed = 1, kConfigError = 2, kNumericalError = 3 };

void print_row(const std::string& key, const std::string& value) { std::printf("%-14s %s\n", key.c_str(), value.c_str()); }

int cmd_constants(int n, double t_minus, double t_plus, double beta) {
  const pxlab::theory::ExponentWindow w{t_minus, t_plus};
  const auto c = pxlab::theory::constant_set(w, n, beta);
  print_row("n", std::to_string(n));
  print_row("t_minus", format_number(t_minus));
  print_row("t_plus", format_number(t_plus));
  print_row("beta", format_number(beta));
  print_row("beta_star", format_number(c.beta_star));
  print_row("eta_star", format_number(c.eta_star));
  print_row("m_beta", format_number(c.m_beta));
  print_row("c_star", format_number(c.c_star));
  print_row("c_tilde_star", format_number(c.c_tilde_star));
  print_row("c_sharp", format_number(c.c_sharp));
  return kOk;
}

int cmd_identities(std::uint64_t seed, int count) {
  pxlab::theory::IdentitySuiteOptions opt;
  opt.seed = seed;
  opt.count = count;
  const auto r = pxlab::theory::run_identity_suite(opt);
  print_row("polynomials", std::to_string(r.polynomials));
  print_row("sigma2", format_number(r.sigma2_worst) + " over " + std::to_string(r.sigma2_checks) + " points");
  print_row("lemma21_n2", format_number(r.lemma21_worst) + " over " + std::to_string(r.lemma21_checks) + " points");
  print_row("lemma21_n3", format_number(r.inequality_worst) + " over " + std::to_string(r.inequality_checks) + " points");
  print_row("divergence", format_number(r.divergence_worst) + " over " + std::to_string(r.divergence_checks) +
                              " polynomials");
  print_row("result", r.passed ? "pass" : "FAIL");
  return r.passed ? kOk : kAuditFailed;
}

void print_solve(const pxlab::solver::ContinuationResult& s) {
  for (std::size_t k = 0; k < s.solves.size(); ++k) {
    const auto& r = s.solves[k];
    std::printf("eps %-10s iterations %-4d residual %-24s update %s\n", format_number(s.schedule[k]).c_str(),
                r.iterations, format_number(r.residual).c_str(), format_number(r.update).c_str());
  }
}

std::string output_dir(const pxlab::config::RunConfig& cfg, const std::string& override_dir) {
  return override_dir.empty() ? cfg.output_directory : override_dir;
}

int cmd_solve(const std::string& path, const std::string& out) {
  const auto cfg = pxlab::config::load_config(path);
  const auto solve = pxlab::run::run_solve(cfg);
  pxlab::report_io::write_outputs(output_dir(cfg, out), "solve", cfg, solve, nullptr);
  print_solve(solve);
  return kOk;
}

int cmd_audit(const std::string& path, const std::string& solution, const std::string& out) {
  const auto cfg = pxlab::config::load_config(path);
  const auto solve = solution.empty() ? pxlab::run::run_solve(cfg)
                                      : pxlab::run::from_stored(cfg, pxlab::report_io::read_field_csv(solution, cfg.grid()));
  const auto audits = pxlab::run::run_audits(cfg, solve);
  pxlab::report_io::write_outputs(output_dir(cfg, out), "audit", cfg, solve, &audits);
  for (const auto& r : audits.reports) {
    std::printf("%-16s beta %-6s eps %-8s %-28s worst %-24s %s\n", r.audit.c_str(), format_number(r.beta).c_str(),
                format_number(r.eps).c_str(), r.region.c_str(), format_number(r.worst).c_str(),
                r.passed ? "pass" : "FAIL");
  }
  for (const auto& g : audits.reverse_holder) {
    std::printf("%-16s beta %-6s delta %-8s worst ratio %s\n", "reverse_holder", format_number(g.beta).c_str(),
                format_number(g.result.delta).c_str(), format_number(g.result.worst_ratio).c_str());
  }
  for (const auto& g : audits.gehring) {
    std::printf("%-16s beta %-6s delta %-8s %s\n", "gehring", format_number(g.beta).c_str(),
                format_number(g.result.delta).c_str(), g.result.found ? "pass" : "FAIL");
  }
  return audits.passed ? kOk : kAuditFailed;
}

int cmd_gehring(const std::string& path, const std::string& out) {
  const auto cfg = pxlab::config::load_config(path);
  const auto solve = pxlab::run::run_solve(cfg);
  const auto audits = pxlab::run::run_gehring(cfg, solve);
  pxlab::report_io::write_outputs(output_dir(cfg, out), "gehring", cfg, solve, &audits);
  for (const auto& g : audits.gehring) {
    std::printf("beta %-6s delta %-8s worst ratio %-24s budget %s %s\n", format_number(g.beta).c_str(),
                format_number(g.result.delta).c_str(), format_number(g.result.worst_ratio).c_str(),
                format_number(g.result.c_target).c_str(), g.result.found ? "pass" : "FAIL");
  }
  return audits.passed ? kOk : kAuditFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularity experiments for the normalized p(x)-Laplacian"};
  app.require_subcommand(1);

  int n = 2;
  double t_minus = 2.0;
  double t_plus = 2.0;
  double beta = 0.0;
  auto* constants = app.add_subcommand("constants", "Print the estimate constants");
  constants->add_option("--n", n, "Dimension")->capture_default_str();
  constants->add_option("--tminus", t_minus, "Lower exponent bound")->capture_default_str();
  constants->add_option("--tplus", t_plus, "Upper exponent bound")->capture_default_str();
  constants->add_option("--beta", beta, "Stretch exponent")->capture_default_str();

  std::string config_path;
  std::string solution_path;
  std::string out_dir;
  auto* solve = app.add_subcommand("solve", "Solve the regularized problem along the eps schedule");
  solve->add_option("--config", config_path, "Run configuration")->required();
  solve->add_option("--output", out_dir, "Output directory (overrides the config)");

  auto* audit = app.add_subcommand("audit", "Solve and run the configured audits");
  audit->add_option("--config", config_path, "Run configuration")->required();
  audit->add_option("--solution", solution_path, "Audit a stored solution.csv instead of solving");
  audit->add_option("--output", out_dir, "Output directory (overrides the config)");

  std::uint64_t seed = 7;
  int count = 100;
  auto* identities = app.add_subcommand("identities", "Random-polynomial identity checks");
  identities->add_option("--seed", seed, "Random seed")->capture_default_str();
  identities->add_option("--count", count, "Number of polynomials")->capture_default_str()->check(CLI::PositiveNumber);

  auto* gehring = app.add_subcommand("gehring", "Search the largest reverse-Hoelder exponent gain");
  gehring->add_option("--config", config_path, "Run configuration")->required();
  gehring->add_option("--output", out_dir, "Output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*constants) return cmd_constants(n, t_minus, t_plus, beta);
    if (*identities) return cmd_identities(seed, count);
    if (*solve) return cmd_solve(config_path, out_dir);
    if (*audit) return cmd_audit(config_path, solution_path, out_dir);
    if (*gehring) return cmd_gehring(config_path, out_dir);
  } catch (const pxlab::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const pxlab::expr::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kConfigError;
  } catch (const pxlab::expr::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kConfigError;
  } catch (const pxlab::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kConfigError;
}
