#include "pxlab/identity_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace pxlab::theory {

namespace {

using diffops::StretchParams;

std::string format_coefficient(double c) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "(%.17g)", c);
  return buf;
}

double eval(const expr::Expression& e, std::span<const double> x) { return expr::evaluate(e, x); }

Vec random_point(std::mt19937_64& rng, int dimension, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vec x = Vec::Zero();
  for (int a = 0; a < dimension; ++a) x[a] = u(rng);
  return x;
}

struct Bump {
  double radius;

  double value(const Vec& x) const {
    const double q = x.squaredNorm() / (radius * radius);
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
  }
  Vec gradient(const Vec& x) const {
    const double q = x.squaredNorm() / (radius * radius);
    if (q >= 1.0) return Vec::Zero();
    const double w = 1.0 - q;
    return -value(x) / (w * w) * 2.0 / (radius * radius) * x;
  }
};

// Relative mismatch of the integral identity on [-1, 1]^2 with a bump test
// function; both integrands are smooth with compact support, so the node sum
// converges faster than any power of h.
double divergence_mismatch(const SymbolicStretch& sym, const Vec& c, int nodes) {
  const Bump psi{0.9};
  const double h = 2.0 / (nodes - 1);
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
  const int n = sym.dimension;
  for (int j = 0; j < nodes; ++j)
    for (int i = 0; i < nodes; ++i) {
      const Vec x(-1.0 + i * h, -1.0 + j * h, 0.0);
      const double p = psi.value(x);
      if (p == 0.0) continue;
      const Vec dp = psi.gradient(x);
      const std::span<const double> pt(x.data(), 3);
      const Vec f = sym.field(pt);
      const Mat m = sym.jacobian(pt);
      const double l = diffops::sigma2(m, n) * p;
      lhs += l;
      scale += std::abs(l);
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          const double r1 = (f[a] - c[a]) * m(b, b) * dp[a];
          const double r2 = (f[a] - c[a]) * m(b, a) * dp[b];
          rhs += r1 - r2;
          scale += std::abs(r1) + std::abs(r2);
        }
    }
  const double cell = h * h;
  return std::abs(lhs - rhs) * cell / (1.0 + scale * cell);
}

}  // namespace

expr::Expression random_polynomial(std::mt19937_64& rng, int dimension, int degree) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::string src;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b)
      for (int c = 0; a + b + c <= degree; ++c) {
        if (dimension == 2 && c > 0) break;
        if (!src.empty()) src += " + ";
        src += format_coefficient(coef(rng));
        const int powers[3] = {a, b, c};
        for (int k = 0; k < dimension; ++k) {
          if (powers[k] == 0) continue;
          src += "*x" + std::to_string(k + 1);
          if (powers[k] > 1) src += "^" + std::to_string(powers[k]);
        }
      }
  return expr::parse_expression(src, dimension);
}

SymbolicStretch::SymbolicStretch(const expr::Expression& v, const StretchParams& s) : dimension(v.dimension()) {
  s.validate();
  const int n = dimension;
  for (int i = 0; i < n; ++i) dv.push_back(expr::differentiate(v, i));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d2v.push_back(expr::differentiate(dv[i], j));
  expr::Expression q = expr::Expression::constant(s.eps, n);
  for (int i = 0; i < n; ++i) q = q + dv[i] * dv[i];
  const expr::Expression w = expr::pow(q, expr::Expression::constant(0.5 * s.beta, n));
  for (int i = 0; i < n; ++i) f.push_back(w * dv[i]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) df.push_back(expr::differentiate(f[i], j));
}

Vec SymbolicStretch::gradient(std::span<const double> x) const {
  Vec g = Vec::Zero();
  for (int i = 0; i < dimension; ++i) g[i] = eval(dv[i], x);
  return g;
}

Mat SymbolicStretch::hessian(std::span<const double> x) const {
  Mat m = Mat::Zero();
  for (int i = 0; i < dimension; ++i)
    for (int j = 0; j < dimension; ++j) m(i, j) = eval(d2v[i * dimension + j], x);
  return m;
}

Vec SymbolicStretch::field(std::span<const double> x) const {
  Vec g = Vec::Zero();
  for (int i = 0; i < dimension; ++i) g[i] = eval(f[i], x);
  return g;
}

Mat SymbolicStretch::jacobian(std::span<const double> x) const {
  Mat m = Mat::Zero();
  for (int i = 0; i < dimension; ++i)
    for (int j = 0; j < dimension; ++j) m(i, j) = eval(df[i * dimension + j], x);
  return m;
}

IdentitySuiteResult run_identity_suite(const IdentitySuiteOptions& options) {
  if (options.count < 1) throw PreconditionError("identity suite needs at least one polynomial");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> beta_dist(-0.9, 3.0);
  std::uniform_real_distribution<double> eps_dist(0.1, 2.0);
  std::uniform_int_distribution<int> degree_dist(1, 3);

  IdentitySuiteResult r;
  r.inequality_worst = INFINITY;
  const int per_poly_ineq = std::max(1, (options.inequality_points + options.count - 1) / options.count);
  std::size_t ineq_remaining = static_cast<std::size_t>(std::max(0, options.inequality_points));

  for (int k = 0; k < options.count; ++k) {
    const StretchParams s{beta_dist(rng), eps_dist(rng)};
    for (int n : {2, 3}) {
      const expr::Expression v = random_polynomial(rng, n, degree_dist(rng));
      const SymbolicStretch sym(v, s);
      for (int t = 0; t < options.points_per_polynomial; ++t) {
        const Vec x = random_point(rng, n, 1.0);
        const std::span<const double> pt(x.data(), 3);
        const Vec g = sym.gradient(pt);
        const Mat h = sym.hessian(pt);
        const Comparison id = sigma2_identity(sym.jacobian(pt), g, h, s, n);
        r.sigma2_worst = std::max(r.sigma2_worst, std::abs(id.relative()));
        ++r.sigma2_checks;
        if (n == 2) {
          r.lemma21_worst = std::max(r.lemma21_worst, std::abs(lemma21(g, h, 2).relative()));
          ++r.lemma21_checks;
        }
      }
      if (n == 3) {
        const std::size_t m = std::min<std::size_t>(ineq_remaining, static_cast<std::size_t>(per_poly_ineq));
        for (std::size_t t = 0; t < m; ++t) {
          const Vec x = random_point(rng, 3, 1.0);
          const std::span<const double> pt(x.data(), 3);
          const double rel = lemma21(sym.gradient(pt), sym.hessian(pt), 3).relative();
          r.inequality_worst = std::min(r.inequality_worst, rel);
          ++r.inequality_checks;
        }
        ineq_remaining -= m;
      }
      if (n == 2 && k < options.divergence_polynomials) {
        const Vec c = random_point(rng, 2, 1.0);
        r.divergence_worst = std::max(r.divergence_worst, divergence_mismatch(sym, c, options.divergence_nodes));
        ++r.divergence_checks;
      }
    }
    ++r.polynomials;
  }
  if (r.inequality_checks == 0) r.inequality_worst = 0.0;
  r.passed = r.sigma2_worst <= options.tolerance && r.lemma21_worst <= options.tolerance &&
             r.inequality_worst >= -options.tolerance && r.divergence_worst <= options.divergence_tolerance;
  return r;
}

}  // namespace pxlab::theory
