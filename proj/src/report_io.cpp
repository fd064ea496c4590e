#include "pxlab/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pxlab::report_io {

namespace {

using json = nlohmann::ordered_json;

json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

json vec_json(const Vec& v, int n) {
  json a = json::array();
  for (int i = 0; i < n; ++i) a.push_back(number(v[i]));
  return a;
}

void write_prefix(std::ostream& out, const std::string& audit, int n, const theory::ExponentWindow& w, double beta,
                  double eps, double h) {
  out << audit << ',' << n << ',' << format_number(w.t_minus) << ',' << format_number(w.t_plus) << ','
      << format_number(beta) << ',' << format_number(eps) << ',' << format_number(h);
}

const char* kPrefix = "audit,n,t_minus,t_plus,beta,eps,h";

std::ofstream open(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_field_csv(std::ostream& out, const ScalarField& field) {
  const int n = field.grid.dimension();
  for (int a = 0; a < n; ++a) out << 'x' << (a + 1) << ',';
  out << "value\n";
  for (std::size_t node = 0; node < field.size(); ++node) {
    const Vec x = field.grid.coordinates(node);
    for (int a = 0; a < n; ++a) out << format_number(x[a]) << ',';
    out << format_number(field[node]) << '\n';
  }
}

ScalarField read_field_csv(const std::string& path, const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open solution file " + path);
  std::string line;
  std::getline(in, line);
  ScalarField out(grid, 0.0);
  const int n = grid.dimension();
  std::size_t node = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (node >= out.size()) throw PreconditionError("solution file has more rows than grid nodes");
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != static_cast<std::size_t>(n + 1)) throw PreconditionError("malformed solution row");
    const Vec x = grid.coordinates(node);
    for (int a = 0; a < n; ++a) {
      if (std::abs(vals[a] - x[a]) > 1e-9 * (1.0 + std::abs(x[a]))) {
        throw PreconditionError("solution file coordinates do not match the grid");
      }
    }
    out[node++] = vals.back();
  }
  if (node != out.size()) throw PreconditionError("solution file has fewer rows than grid nodes");
  return out;
}

void write_continuation_csv(std::ostream& out, const config::RunConfig& cfg, const theory::ExponentWindow& w,
                            const solver::ContinuationResult& solve) {
  const GridSpec grid = cfg.grid();
  out << "n,t_minus,t_plus,eps,h,mollify_radius,iterations,converged,update,residual,g_norm,ellipticity_min,"
         "ellipticity_max,dominance_violations,principle_lower,principle_upper,principle_holds,increment\n";
  for (std::size_t k = 0; k < solve.solves.size(); ++k) {
    const auto& r = solve.solves[k];
    out << cfg.dimension << ',' << format_number(w.t_minus) << ',' << format_number(w.t_plus) << ','
        << format_number(solve.schedule[k]) << ',' << format_number(grid.max_spacing()) << ','
        << format_number(cfg.radius_for(solve.schedule[k])) << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
        << ',' << format_number(r.update) << ',' << format_number(r.residual) << ',' << format_number(r.g_norm) << ','
        << format_number(r.ellipticity_min) << ',' << format_number(r.ellipticity_max) << ','
        << r.dominance_violations << ',' << format_number(r.principle_lower) << ','
        << format_number(r.principle_upper) << ',' << (r.principle_holds ? 1 : 0) << ',';
    if (k > 0) out << format_number(solve.increments[k - 1]);
    out << '\n';
  }
}

bool write_reports_csv(std::ostream& out, const std::vector<estimates::EstimateReport>& reports,
                       const std::string& audit) {
  bool header = false;
  for (const auto& r : reports) {
    if (r.audit != audit) continue;
    if (!header) {
      out << kPrefix;
      for (const auto& c : r.columns) out << ',' << c;
      out << '\n';
      header = true;
    }
    for (const auto& row : r.rows) {
      write_prefix(out, r.audit, r.n, r.window, r.beta, r.eps, r.h);
      for (double x : row) out << ',' << format_number(x);
      out << '\n';
    }
  }
  return header;
}

void write_gehring_csv(std::ostream& out, const std::string& audit, int n, const theory::ExponentWindow& w,
                       double eps, double h, const std::vector<run::GehringRun>& runs) {
  out << kPrefix << ",delta,c_target,found,ball";
  for (int a = 0; a < n; ++a) out << ",x" << (a + 1);
  out << ",radius,lhs,oscillation,source,ratio\n";
  for (const auto& g : runs) {
    for (std::size_t b = 0; b < g.result.table.size(); ++b) {
      const auto& row = g.result.table[b];
      write_prefix(out, audit, n, w, g.beta, eps, h);
      out << ',' << format_number(g.result.delta) << ',' << format_number(g.result.c_target) << ','
          << (g.result.found ? 1 : 0) << ',' << b;
      for (int a = 0; a < n; ++a) out << ',' << format_number(row.ball.center[a]);
      out << ',' << format_number(row.ball.radius) << ',' << format_number(row.lhs) << ','
          << format_number(row.oscillation) << ',' << format_number(row.source) << ',' << format_number(row.ratio)
          << '\n';
    }
  }
}

json config_json(const config::RunConfig& cfg) {
  const char* mollify = cfg.mollify == config::MollifyMode::Tied  ? "yes"
                        : cfg.mollify == config::MollifyMode::Off ? "no"
                                                                  : "fixed";
  json j;
  j["problem"] = {{"dimension", cfg.dimension}, {"lower", cfg.lower},     {"upper", cfg.upper},
                  {"points", cfg.points},       {"p", cfg.p},             {"f", cfg.f},
                  {"boundary", cfg.boundary},   {"eps", cfg.eps},         {"mollify", mollify},
                  {"mollify_radius", cfg.mollify_radius}};
  j["solver"] = {{"tolerance", cfg.solve.tolerance},
                 {"max_iterations", cfg.solve.max_iterations},
                 {"damping", cfg.solve.damping}};
  j["audit"] = {{"audits", cfg.audits}, {"beta", cfg.betas},
                {"kappa", cfg.kappa},   {"center", vec_json(cfg.ball_center(), cfg.dimension)},
                {"radii", cfg.radii},   {"delta", cfg.delta},
                {"gehring_budget", cfg.gehring_budget},
                {"family_radius", cfg.family_radius},
                {"seed", cfg.seed}};
  j["output"] = {{"formats", cfg.formats}};
  return j;
}

json solve_json(const solver::ContinuationResult& solve) {
  json a = json::array();
  for (std::size_t k = 0; k < solve.solves.size(); ++k) {
    const auto& r = solve.solves[k];
    json s;
    s["eps"] = solve.schedule[k];
    s["iterations"] = r.iterations;
    s["converged"] = r.converged;
    s["update"] = number(r.update);
    s["residual"] = number(r.residual);
    s["g_norm"] = number(r.g_norm);
    s["ellipticity"] = {number(r.ellipticity_min), number(r.ellipticity_max)};
    s["dominance_violations"] = r.dominance_violations;
    s["maximum_principle"] = {{"lower", number(r.principle_lower)},
                              {"upper", number(r.principle_upper)},
                              {"holds", r.principle_holds}};
    s["increment"] = k > 0 ? number(solve.increments[k - 1]) : json(nullptr);
    a.push_back(std::move(s));
  }
  return a;
}

json report_json(const estimates::EstimateReport& r) {
  json j;
  j["audit"] = r.audit;
  j["region"] = r.region;
  j["n"] = r.n;
  j["t_minus"] = number(r.window.t_minus);
  j["t_plus"] = number(r.window.t_plus);
  j["beta"] = number(r.beta);
  j["eps"] = number(r.eps);
  j["h"] = number(r.h);
  if (r.has_constants) {
    j["constants"] = {{"beta_star", number(r.constants.beta_star)},  {"eta_star", number(r.constants.eta_star)},
                      {"m_beta", number(r.constants.m_beta)},        {"c_star", number(r.constants.c_star)},
                      {"c_tilde_star", number(r.constants.c_tilde_star)}, {"c_sharp", number(r.constants.c_sharp)}};
  } else {
    j["constants"] = nullptr;
  }
  j["worst"] = number(r.worst);
  j["worst_node"] = r.worst_node;
  j["worst_location"] = vec_json(r.worst_location, r.n);
  j["tolerance"] = number(r.tolerance);
  j["passed"] = r.passed;
  j["nodes"] = r.nodes;
  j["violations"] = r.violations;
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = number(v);
  j["metrics"] = std::move(m);
  return j;
}

json gehring_json(const run::GehringRun& g) {
  json j;
  j["beta"] = g.beta;
  j["delta"] = g.result.delta;
  j["found"] = g.result.found;
  j["c_target"] = number(g.result.c_target);
  j["worst_ratio"] = number(g.result.worst_ratio);
  j["searched"] = g.result.searched;
  json balls = json::array();
  for (const auto& row : g.result.table) {
    balls.push_back({{"center", vec_json(row.ball.center, 3)},
                     {"radius", row.ball.radius},
                     {"lhs", number(row.lhs)},
                     {"oscillation", number(row.oscillation)},
                     {"source", number(row.source)},
                     {"ratio", number(row.ratio)}});
  }
  j["balls"] = std::move(balls);
  return j;
}

void write_outputs(const std::string& directory, const std::string& command, const config::RunConfig& cfg,
                   const solver::ContinuationResult& solve, const run::AuditRun* audits) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  fs::create_directories(dir);
  const theory::ExponentWindow w = audits ? audits->window : config::sampled_window(cfg);
  const double h = cfg.grid().max_spacing();
  const double last_eps = solve.schedule.empty() ? 0.0 : solve.schedule.back();

  if (cfg.wants_format("csv")) {
    if (!solve.solves.empty()) {
      auto out = open(dir / "solution.csv");
      write_field_csv(out, solve.solves.back().v);
    }
    {
      auto out = open(dir / "continuation.csv");
      write_continuation_csv(out, cfg, w, solve);
    }
    if (audits) {
      for (const char* name : config::kAuditNames) {
        std::ostringstream ss;
        if (write_reports_csv(ss, audits->reports, name)) {
          auto out = open(dir / (std::string(name) + ".csv"));
          out << ss.str();
        }
      }
      if (!audits->reverse_holder.empty()) {
        auto out = open(dir / "reverse_holder.csv");
        write_gehring_csv(out, "reverse_holder", cfg.dimension, w, last_eps, h, audits->reverse_holder);
      }
      if (!audits->gehring.empty()) {
        auto out = open(dir / "gehring.csv");
        write_gehring_csv(out, "gehring", cfg.dimension, w, last_eps, h, audits->gehring);
      }
    }
  }
  if (cfg.wants_format("json")) {
    json j;
    j["command"] = command;
    j["config"] = config_json(cfg);
    j["window"] = {{"t_minus", w.t_minus}, {"t_plus", w.t_plus}};
    j["solves"] = solve_json(solve);
    if (audits) {
      json reps = json::array();
      for (const auto& r : audits->reports) reps.push_back(report_json(r));
      j["reports"] = std::move(reps);
      json rh = json::array();
      for (const auto& g : audits->reverse_holder) rh.push_back(gehring_json(g));
      j["reverse_holder"] = std::move(rh);
      json gh = json::array();
      for (const auto& g : audits->gehring) gh.push_back(gehring_json(g));
      j["gehring"] = std::move(gh);
      j["passed"] = audits->passed;
    }
    auto out = open(dir / "summary.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace pxlab::report_io
