#include "pxlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pxlab::config {

namespace {

struct Value {
  std::string text;
  bool quoted = false;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits `rest` on commas outside quotes and drops a trailing comment.
std::vector<Value> split_values(std::string_view rest, int line) {
  std::vector<Value> out;
  Value cur;
  bool in_quotes = false;
  bool had_quotes = false;
  std::string raw;
  auto flush = [&]() {
    const std::string_view t = trim(raw);
    if (had_quotes) {
      if (t.size() < 2 || t.front() != '"' || t.back() != '"') throw ConfigError("malformed quoted value", line);
      out.push_back({std::string(t.substr(1, t.size() - 2)), true});
    } else {
      if (t.empty()) throw ConfigError("empty value", line);
      out.push_back({std::string(t), false});
    }
    raw.clear();
    had_quotes = false;
  };
  for (char ch : rest) {
    if (in_quotes) {
      raw += ch;
      if (ch == '"') in_quotes = false;
      continue;
    }
    if (ch == '#') break;
    if (ch == '"') {
      in_quotes = true;
      had_quotes = true;
      raw += ch;
    } else if (ch == ',') {
      flush();
    } else {
      raw += ch;
    }
  }
  if (in_quotes) throw ConfigError("unterminated quoted value", line);
  flush();
  return out;
}

double to_double(const Value& v, int line) {
  double x = 0.0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  if (!v.quoted && !v.text.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, x);
  if (v.quoted || ec != std::errc() || ptr != e) throw ConfigError("expected a number, got '" + v.text + "'", line);
  return x;
}

long long to_integer(const Value& v, int line) {
  long long x = 0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  const auto [ptr, ec] = std::from_chars(b, e, x);
  if (v.quoted || ec != std::errc() || ptr != e) throw ConfigError("expected an integer, got '" + v.text + "'", line);
  return x;
}

const Value& single(const std::vector<Value>& vs, const std::string& key, int line) {
  if (vs.size() != 1) throw ConfigError("key '" + key + "' takes a single value", line);
  return vs.front();
}

std::vector<double> doubles(const std::vector<Value>& vs, int line) {
  std::vector<double> out;
  for (const auto& v : vs) out.push_back(to_double(v, line));
  return out;
}

std::vector<std::string> words(const std::vector<Value>& vs, int line) {
  std::vector<std::string> out;
  for (const auto& v : vs) {
    if (v.quoted) throw ConfigError("expected a bare word, got a quoted value", line);
    out.push_back(v.text);
  }
  return out;
}

const std::vector<std::string>& section_keys(const std::string& section) {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"problem", {"dimension", "lower", "upper", "points", "p", "f", "boundary", "eps", "mollify"}},
      {"solver", {"tolerance", "max_iterations", "damping"}},
      {"audit", {"audits", "beta", "kappa", "center", "radii", "delta", "gehring_budget", "family_radius", "seed"}},
      {"output", {"directory", "formats"}},
  };
  static const std::vector<std::string> none;
  const auto it = keys.find(section);
  return it == keys.end() ? none : it->second;
}

int line_of(const RunConfig& cfg, const std::string& key) {
  const auto it = cfg.key_lines.find(key);
  return it == cfg.key_lines.end() ? 0 : it->second;
}

void assign(RunConfig& cfg, const std::string& section, const std::string& key, const std::vector<Value>& vs,
            int line) {
  const std::string full = section + "." + key;
  if (full == "problem.dimension") {
    cfg.dimension = static_cast<int>(to_integer(single(vs, key, line), line));
  } else if (full == "problem.lower") {
    cfg.lower = doubles(vs, line);
  } else if (full == "problem.upper") {
    cfg.upper = doubles(vs, line);
  } else if (full == "problem.points") {
    cfg.points.clear();
    for (const auto& v : vs) cfg.points.push_back(static_cast<int>(to_integer(v, line)));
  } else if (full == "problem.p" || full == "problem.f" || full == "problem.boundary") {
    const Value& v = single(vs, key, line);
    std::string& target = key == "p" ? cfg.p : key == "f" ? cfg.f : cfg.boundary;
    target = v.text;
  } else if (full == "problem.eps") {
    cfg.eps = doubles(vs, line);
  } else if (full == "problem.mollify") {
    const Value& v = single(vs, key, line);
    if (!v.quoted && v.text == "yes") {
      cfg.mollify = MollifyMode::Tied;
    } else if (!v.quoted && v.text == "no") {
      cfg.mollify = MollifyMode::Off;
    } else {
      cfg.mollify = MollifyMode::Fixed;
      cfg.mollify_radius = to_double(v, line);
      if (!(cfg.mollify_radius > 0.0)) throw ConfigError("mollify radius must be positive", line);
    }
  } else if (full == "solver.tolerance") {
    cfg.solve.tolerance = to_double(single(vs, key, line), line);
  } else if (full == "solver.max_iterations") {
    cfg.solve.max_iterations = static_cast<int>(to_integer(single(vs, key, line), line));
  } else if (full == "solver.damping") {
    cfg.solve.damping = to_double(single(vs, key, line), line);
  } else if (full == "audit.audits") {
    cfg.audits = words(vs, line);
    for (const auto& a : cfg.audits) {
      if (std::find_if(std::begin(kAuditNames), std::end(kAuditNames), [&](const char* n) { return a == n; }) ==
          std::end(kAuditNames)) {
        throw ConfigError("unknown audit '" + a + "'", line);
      }
    }
  } else if (full == "audit.beta") {
    cfg.betas = doubles(vs, line);
  } else if (full == "audit.kappa") {
    cfg.kappa = to_double(single(vs, key, line), line);
  } else if (full == "audit.center") {
    cfg.center = doubles(vs, line);
  } else if (full == "audit.radii") {
    cfg.radii = doubles(vs, line);
  } else if (full == "audit.delta") {
    cfg.delta = to_double(single(vs, key, line), line);
  } else if (full == "audit.gehring_budget") {
    cfg.gehring_budget = doubles(vs, line);
  } else if (full == "audit.family_radius") {
    cfg.family_radius = to_double(single(vs, key, line), line);
  } else if (full == "audit.seed") {
    const long long s = to_integer(single(vs, key, line), line);
    if (s < 0) throw ConfigError("seed must be nonnegative", line);
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (full == "output.directory") {
    cfg.output_directory = single(vs, key, line).text;
  } else if (full == "output.formats") {
    cfg.formats = words(vs, line);
    for (const auto& f : cfg.formats) {
      if (f != "csv" && f != "json") throw ConfigError("unknown output format '" + f + "'", line);
    }
  }
}

void check_local(const RunConfig& cfg) {
  auto fail = [&](const std::string& msg, const std::string& key) { throw ConfigError(msg, line_of(cfg, key)); };
  if (cfg.dimension != 2 && cfg.dimension != 3) fail("dimension must be 2 or 3", "problem.dimension");
  const auto n = static_cast<std::size_t>(cfg.dimension);
  if (cfg.lower.size() != 1 && cfg.lower.size() != n) fail("lower needs 1 or n values", "problem.lower");
  if (cfg.upper.size() != 1 && cfg.upper.size() != n) fail("upper needs 1 or n values", "problem.upper");
  if (cfg.points.size() != 1 && cfg.points.size() != n) fail("points needs 1 or n values", "problem.points");
  if (cfg.eps.empty()) fail("eps schedule is empty", "problem.eps");
  for (std::size_t k = 0; k < cfg.eps.size(); ++k) {
    if (!(cfg.eps[k] > 0.0 && cfg.eps[k] < 1.0)) fail("eps values must lie in (0, 1)", "problem.eps");
    if (k > 0 && !(cfg.eps[k] < cfg.eps[k - 1])) fail("eps schedule must strictly decrease", "problem.eps");
  }
  try {
    cfg.solve.validate();
  } catch (const PreconditionError& e) {
    fail(e.what(), "solver.tolerance");
  }
  if (cfg.betas.empty()) fail("beta list is empty", "audit.beta");
  if (!(cfg.kappa > 0.0)) fail("kappa must be positive", "audit.kappa");
  if (!cfg.center.empty() && cfg.center.size() != n) fail("center needs n values", "audit.center");
  for (double r : cfg.radii)
    if (!(r > 0.0)) fail("radii must be positive", "audit.radii");
  if (cfg.wants("caccioppoli") && cfg.radii.empty()) fail("caccioppoli audit needs radii", "audit.audits");
  if (!(cfg.delta >= 0.0)) fail("delta must be nonnegative", "audit.delta");
  if (!(cfg.family_radius >= 0.0)) fail("family_radius must be nonnegative", "audit.family_radius");
  for (double b : cfg.gehring_budget)
    if (!(b > 0.0)) fail("gehring budget must be positive", "audit.gehring_budget");
  if (!cfg.gehring_budget.empty() && cfg.gehring_budget.size() != 1 && cfg.gehring_budget.size() != cfg.betas.size()) {
    fail("gehring_budget needs one value or one per beta", "audit.gehring_budget");
  }
  if (cfg.wants("gehring") && cfg.gehring_budget.empty()) fail("gehring audit needs gehring_budget", "audit.audits");
}

std::array<double, 3> expand(const std::vector<double>& v) {
  std::array<double, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) out[a] = v.size() == 1 ? v[0] : (a < v.size() ? v[a] : 0.0);
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

GridSpec RunConfig::grid() const {
  Index3 pts{1, 1, 1};
  for (std::size_t a = 0; a < 3; ++a) pts[a] = points.size() == 1 ? points[0] : (a < points.size() ? points[a] : 1);
  return GridSpec(dimension, expand(lower), expand(upper), pts);
}

double RunConfig::radius_for(double e) const {
  switch (mollify) {
    case MollifyMode::Tied: return solver::tied_mollification_radius(grid(), e);
    case MollifyMode::Off: return 0.0;
    case MollifyMode::Fixed: return mollify_radius;
  }
  return 0.0;
}

solver::ProblemSpec RunConfig::problem(std::size_t index) const {
  const double e = eps.at(index);
  return solver::ProblemSpec{grid(),
                             expr::parse_expression(p, dimension),
                             expr::parse_expression(f, dimension),
                             expr::parse_expression(boundary, dimension),
                             e,
                             radius_for(e)};
}

bool RunConfig::wants(std::string_view audit) const {
  return std::find(audits.begin(), audits.end(), audit) != audits.end();
}

bool RunConfig::wants_format(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

Vec RunConfig::ball_center() const {
  if (!center.empty()) {
    Vec c = Vec::Zero();
    for (int a = 0; a < dimension; ++a) c[a] = center[static_cast<std::size_t>(a)];
    return c;
  }
  return solver::central_ball(grid()).center;
}

double RunConfig::budget_for(std::size_t index) const {
  if (gehring_budget.empty()) throw PreconditionError("no gehring budget configured");
  return gehring_budget.size() == 1 ? gehring_budget[0] : gehring_budget.at(index);
}

theory::ExponentWindow sampled_window(const RunConfig& cfg) {
  const ScalarField p = sample(expr::parse_expression(cfg.p, cfg.dimension), cfg.grid());
  const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
  return {*lo, *hi};
}

void validate(const RunConfig& cfg) {
  GridSpec grid = GridSpec::cube(2, 0.0, 1.0, 8);
  try {
    grid = cfg.grid();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what(), line_of(cfg, "problem.points"));
  }
  for (const auto& [key, text] : {std::pair<std::string, std::string>{"problem.p", cfg.p},
                                  {"problem.f", cfg.f},
                                  {"problem.boundary", cfg.boundary}}) {
    try {
      (void)sample(expr::parse_expression(text, cfg.dimension), grid);
    } catch (const expr::ParseError& e) {
      throw ConfigError(std::string(e.what()) + " (offset " + std::to_string(e.offset()) + ")", line_of(cfg, key));
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of(cfg, key));
    }
  }
  const theory::ExponentWindow w = sampled_window(cfg);
  if (!(w.t_minus > 1.0)) throw ConfigError("sampled exponent must exceed 1", line_of(cfg, "problem.p"));
  const bool limit_audits = cfg.wants("quasiregularity") || cfg.wants("reverse_holder") || cfg.wants("gehring");
  for (double b : cfg.betas) {
    try {
      (void)theory::constant_set(w, cfg.dimension, b);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what(), line_of(cfg, "audit.beta"));
    }
    if (limit_audits && b < 0.0) {
      throw ConfigError("quasiregularity, reverse_holder and gehring audits need beta >= 0", line_of(cfg, "audit.beta"));
    }
  }
  if (cfg.mollify == MollifyMode::Fixed) {
    if (cfg.mollify_radius < 2.0 * grid.max_spacing() || cfg.mollify_radius > 0.5 * grid.min_width()) {
      throw ConfigError("mollify radius must lie in [2 h, min width / 2]", line_of(cfg, "problem.mollify"));
    }
  }
  const Vec c = cfg.ball_center();
  for (double r : cfg.radii) {
    try {
      require_inside(grid, BallRegion{c, r, 0.75});
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what(), line_of(cfg, "audit.radii"));
    }
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos) throw ConfigError("unterminated section header", line_no);
      const std::string_view after = trim(line.substr(close + 1));
      if (!after.empty() && after.front() != '#') throw ConfigError("text after section header", line_no);
      section = std::string(trim(line.substr(1, close - 1)));
      if (section_keys(section).empty()) throw ConfigError("unknown section [" + section + "]", line_no);
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
      const std::string key(trim(line.substr(0, eq)));
      if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line_no);
      const auto& keys = section_keys(section);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
      }
      const std::string full = section + "." + key;
      if (cfg.key_lines.count(full)) throw ConfigError("duplicate key '" + key + "'", line_no);
      cfg.key_lines[full] = line_no;
      assign(cfg, section, key, split_values(line.substr(eq + 1), line_no), line_no);
    }
    if (end == text.size()) break;
  }
  check_local(cfg);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace pxlab::config
