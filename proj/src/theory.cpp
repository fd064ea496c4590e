#include "pxlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pxlab::theory {

using diffops::StretchParams;

void ExponentWindow::validate() const {
  if (!(t_minus > 1.0)) throw PreconditionError("exponent window needs t_minus > 1");
  if (!(t_plus >= t_minus) || !std::isfinite(t_plus)) throw PreconditionError("exponent window needs t_minus <= t_plus < inf");
}

double beta_star(int n, double t) {
  if (n < 2) throw PreconditionError("dimension must be at least 2");
  if (!(t > 1.0)) throw PreconditionError("critical exponent needs t > 1");
  return -1.0 + (n - 2) * (t - 1.0) / (2.0 * (n - 1));
}

double eta_star(const ExponentWindow& w, int n, double beta) {
  w.validate();
  const double bs = beta_star(n, w.t_plus);
  const double q = 0.5 * (n - 1) * (w.t_minus - 1.0) * (beta - bs);
  if (!(q > 0.0)) {
    throw InadmissibleExponent("beta = " + std::to_string(beta) + " does not exceed beta_star = " + std::to_string(bs));
  }
  const double mq = std::max((w.t_minus - 2.0) * (w.t_minus - 2.0), (w.t_plus - 2.0) * (w.t_plus - 2.0));
  double cap;
  if (beta >= 0.0) {
    cap = 0.5 * std::min(1.0, 1.0 + beta);
  } else {
    cap = 0.5 * std::min(1.0 + beta, (n - 1) / (-2.0 * beta) * (beta - bs));
  }
  if (mq == 0.0) return 0.5 * cap;
  return 0.5 * std::min(cap, q / mq);
}

ConstantSet constant_set(const ExponentWindow& w, int n, double beta) {
  ConstantSet c;
  c.eta_star = eta_star(w, n, beta);
  c.beta_star = beta_star(n, w.t_plus);
  c.m_beta = (1.0 + std::abs(beta)) * (1.0 + std::abs(beta));
  c.c_star = c.m_beta * 4.0 * (n - 1 + c.eta_star) / c.eta_star;

  const double eta = 0.5 * c.eta_star;
  double a = 0.0;
  for (double p : {w.t_minus, w.t_plus}) {
    a = std::max(a, std::abs(-(n - 2 + 2.0 * eta) * (p - 2.0) + (n - 1 + 2.0 * eta) * beta));
  }
  const double cf = 2.0 / eta + 2.0 * a * a / eta + 0.5 * (n - 2) + eta;
  c.c_tilde_star = c.m_beta * (4.0 / c.eta_star) * cf;
  const double nn = static_cast<double>(n) * (n - 1);
  c.c_sharp = 2.0 * c.c_star * c.c_star * nn * nn + 2.0 * c.c_tilde_star;
  return c;
}

Mat stretched_jacobian(const Vec& dv, const Mat& hess, const StretchParams& s) {
  const double q = dv.squaredNorm() + s.eps;
  if (q == 0.0) return Mat::Zero();
  const Vec hd = hess * dv;
  return std::pow(q, 0.5 * s.beta) * (hess + s.beta * dv * hd.transpose() / q);
}

Comparison sigma2_identity(const Mat& df, const Vec& dv, const Mat& hess, const StretchParams& s, int n) {
  const double q = dv.squaredNorm() + s.eps;
  const double lap = hess.trace();
  const Vec hd = hess * dv;
  const double inf_lap = dv.dot(hd);
  const double t1 = 0.5 * std::pow(q, s.beta) * (hess.squaredNorm() - lap * lap);
  const double t2 = s.beta * std::pow(q, s.beta - 1.0) * (hd.squaredNorm() - lap * inf_lap);
  Comparison c;
  c.lhs = diffops::sigma2(df, n);
  c.rhs = t1 + t2;
  c.scale = std::abs(c.lhs) + std::abs(t1) + std::abs(t2);
  return c;
}

Comparison lemma21(const Vec& dv, const Mat& hess, int n) {
  const double a2 = dv.squaredNorm();
  const double lap = hess.trace();
  const Vec hd = hess * dv;
  const double inf_lap = dv.dot(hd);
  const double hd2 = hd.squaredNorm();
  const double gap = hess.squaredNorm() - lap * lap;
  Comparison c;
  if (n == 2) {
    c.lhs = gap * a2;
    c.rhs = 2.0 * hd2 - 2.0 * inf_lap * lap;
    c.scale = std::abs(c.lhs) + 2.0 * hd2 + 2.0 * std::abs(inf_lap * lap);
    return c;
  }
  const double k = 1.0 / (n - 1);
  const double terms[] = {
      n * k * hd2 * a2,
      -(n - 2) * k * lap * lap * a2 * a2,
      -2.0 * k * inf_lap * lap * a2,
      (n - 2) * k * (hd2 * a2 - inf_lap * inf_lap),
  };
  c.lhs = gap * a2 * a2;
  c.rhs = 0.0;
  c.scale = std::abs(c.lhs);
  for (double t : terms) {
    c.rhs += t;
    c.scale += std::abs(t);
  }
  return c;
}

ScalarField check_sigma2_identity(const ScalarField& v, const StretchParams& s) {
  if (!(s.eps > 0.0)) throw PreconditionError("identity check needs eps > 0");
  s.validate();
  const VectorField dv = diffops::gradient(v);
  const MatrixField h = diffops::hessian(v);
  const int n = v.grid.dimension();
  ScalarField out(v.grid, 0.0);
  for (std::size_t node = 0; node < out.size(); ++node) {
    out.valid[node] = dv.valid[node] && h.valid[node];
    if (!out.valid[node]) continue;
    const Mat df = stretched_jacobian(dv[node], h[node], s);
    out[node] = sigma2_identity(df, dv[node], h[node], s, n).difference();
  }
  return out;
}

Lemma21Report check_lemma21(const ScalarField& v, double tolerance) {
  const VectorField dv = diffops::gradient(v);
  const MatrixField h = diffops::hessian(v);
  Lemma21Report r;
  r.dimension = v.grid.dimension();
  r.worst = r.dimension == 2 ? 0.0 : INFINITY;
  for (std::size_t node = 0; node < v.size(); ++node) {
    if (!dv.valid[node] || !h.valid[node]) continue;
    ++r.nodes;
    const double rel = lemma21(dv[node], h[node], r.dimension).relative();
    if (r.dimension == 2) {
      if (std::abs(rel) > r.worst) {
        r.worst = std::abs(rel);
        r.worst_node = node;
      }
    } else if (rel < r.worst) {
      r.worst = rel;
      r.worst_node = node;
    }
  }
  if (r.nodes == 0) throw PreconditionError("no interior-valid nodes to check");
  r.holds = r.dimension == 2 ? r.worst <= tolerance : r.worst >= -tolerance;
  return r;
}

double DivergenceCheck::mismatch() const { return std::abs(lhs - rhs); }

DivergenceCheck check_divergence_identity(const ScalarField& v, const StretchParams& s, const ScalarField& phi,
                                          const Vec& c) {
  if (!(s.eps > 0.0)) throw PreconditionError("divergence identity needs eps > 0");
  if (!(phi.grid == v.grid)) throw PreconditionError("test function lives on a different grid");
  const VectorField f = diffops::stretched_gradient(v, s);
  const MatrixField df = diffops::jacobian(f);
  const VectorField dphi = diffops::gradient(phi);
  const int n = v.grid.dimension();
  DivergenceCheck out;
  for (std::size_t node = 0; node < v.size(); ++node) {
    const bool active = phi[node] != 0.0 || dphi[node].squaredNorm() != 0.0;
    if (!active) continue;
    if (!df.valid[node] || !dphi.valid[node]) {
      throw PreconditionError("test function support touches the boundary band");
    }
    const Mat& m = df[node];
    out.lhs += diffops::sigma2(m, n) * phi[node];
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        out.rhs += (f[node][i] - c[i]) * (m(j, j) * dphi[node][i] - m(j, i) * dphi[node][j]);
      }
  }
  const double dv = v.grid.cell_volume();
  out.lhs *= dv;
  out.rhs *= dv;
  return out;
}

}  // namespace pxlab::theory
