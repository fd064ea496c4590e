#pragma once

// Explicit constants of the second-order estimates and checkers for the
// algebraic identities behind them.

#include "pxlab/diffops.hpp"

namespace pxlab::theory {

/// Raised when beta does not exceed the critical exponent for the window.
class InadmissibleExponent : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Bounds 1 < t_minus <= p(x) <= t_plus.
struct ExponentWindow {
  double t_minus = 2.0;
  double t_plus = 2.0;

  void validate() const;
};

/// -1 + (n - 2)(t - 1) / (2 (n - 1)); requires n >= 2 and t > 1.
double beta_star(int n, double t);

/// Deterministic choice inside the open admissible set:
///   Q   = (n-1)(t_- - 1)(beta - beta_star(n, t_+)) / 2
///   Mq  = max{(t_- - 2)^2, (t_+ - 2)^2}
///   cap = min{1, 1 + beta} / 2                         if beta >= 0
///         min{1 + beta, (n-1)(beta - beta_star)/(-2 beta)} / 2   otherwise
///   eta = cap / 2 if Mq = 0, else min{cap, Q / Mq} / 2.
/// Throws InadmissibleExponent when Q <= 0.
double eta_star(const ExponentWindow& w, int n, double beta);

struct ConstantSet {
  double beta_star = 0.0;
  double eta_star = 0.0;
  /// (1 + |beta|)^2, bounds |D[(|Dv|^2+eps)^(beta/2) Dv]|^2 by
  /// (|Dv|^2+eps)^beta |D^2 v|^2.
  double m_beta = 1.0;
  double c_star = 0.0;
  double c_tilde_star = 0.0;
  double c_sharp = 0.0;
};

/// c_star       = m_beta * 4 (n - 1 + eta_star) / eta_star
/// c_tilde_star = m_beta * (4 / eta_star) * c_f, with eta = eta_star / 2,
///                c_f = 2/eta + 2 A^2/eta + (n - 2)/2 + eta and
///                A = max_{p in {t_-, t_+}} |-(n - 2 + 2 eta)(p - 2) + (n - 1 + 2 eta) beta|
/// c_sharp      = 2 c_star^2 n^2 (n - 1)^2 + 2 c_tilde_star
ConstantSet constant_set(const ExponentWindow& w, int n, double beta);

/// Two sides of an identity or inequality at one point. `scale` is the sum
/// of the magnitudes of the terms entering either side.
struct Comparison {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;

  double difference() const { return lhs - rhs; }
  /// (lhs - rhs) / (1 + scale)
  double relative() const { return difference() / (1.0 + scale); }
};

/// D[(|Dv|^2+eps)^(beta/2) Dv] by the product rule:
/// s^(beta/2) [D^2v + beta Dv (x) (D^2v Dv) / s], s = |Dv|^2 + eps.
Mat stretched_jacobian(const Vec& dv, const Mat& hess, const diffops::StretchParams& s);

/// lhs = sigma2(df); rhs = s^beta [|D^2v|^2 - (Lap v)^2] / 2
///                       + beta s^(beta-1) [|D^2v Dv|^2 - Lap v * InfLap v].
Comparison sigma2_identity(const Mat& df, const Vec& dv, const Mat& hess, const diffops::StretchParams& s, int n);

/// n = 2: the equality [|H|^2 - (tr H)^2]|a|^2 = 2|Ha|^2 - 2 <Ha,a> tr H.
/// n >= 3: the lower bound for [|H|^2 - (tr H)^2]|a|^4; holds when lhs >= rhs.
Comparison lemma21(const Vec& dv, const Mat& hess, int n);

/// Residual field of the sigma2 identity using the discrete Dv, D^2v and the
/// product-rule Jacobian. Requires eps > 0.
ScalarField check_sigma2_identity(const ScalarField& v, const diffops::StretchParams& s);

struct Lemma21Report {
  int dimension = 2;
  std::size_t nodes = 0;
  /// n = 2: largest |relative residual|. n = 3: smallest relative lhs - rhs.
  double worst = 0.0;
  std::size_t worst_node = 0;
  bool holds = true;
};

/// Node check over interior-valid nodes with relative tolerance `tolerance`.
Lemma21Report check_lemma21(const ScalarField& v, double tolerance = 1e-9);

struct DivergenceCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double mismatch() const;
};

/// Quadratures of int sigma2(DF) phi and of the pair-sum form
///   sum_{i<j} int (F_i - c_i) [d_j F_j d_i phi - d_i F_j d_j phi],
/// F the discrete stretched gradient. Requires eps > 0 and phi vanishing
/// wherever DF or D phi is not interior-valid.
DivergenceCheck check_divergence_identity(const ScalarField& v, const diffops::StretchParams& s,
                                          const ScalarField& phi, const Vec& c);

}  // namespace pxlab::theory
