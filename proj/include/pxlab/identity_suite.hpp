#pragma once

// Randomized checks of the sigma2 structure identities using exact symbolic
// derivatives of random polynomials.

#include <cstdint>
#include <random>

#include "pxlab/expr.hpp"
#include "pxlab/theory.hpp"

namespace pxlab::theory {

struct IdentitySuiteOptions {
  std::uint64_t seed = 7;
  int count = 100;
  int points_per_polynomial = 20;
  /// Random points for the n = 3 inequality, spread over the polynomials.
  int inequality_points = 10000;
  /// Polynomials also checked against the integral identity.
  int divergence_polynomials = 5;
  int divergence_nodes = 161;
  double tolerance = 1e-9;
  double divergence_tolerance = 1e-8;
};

struct IdentitySuiteResult {
  int polynomials = 0;
  std::size_t sigma2_checks = 0;
  std::size_t lemma21_checks = 0;
  std::size_t inequality_checks = 0;
  std::size_t divergence_checks = 0;
  /// Largest |relative residual| of the sigma2 identity (n = 2 and n = 3).
  double sigma2_worst = 0.0;
  /// Largest |relative residual| of the n = 2 equality.
  double lemma21_worst = 0.0;
  /// Smallest relative lhs - rhs of the n = 3 inequality.
  double inequality_worst = 0.0;
  /// Largest relative mismatch of the integral identity.
  double divergence_worst = 0.0;
  bool passed = false;
};

/// Sum of all monomials of total degree <= `degree` with coefficients
/// uniform in [-1, 1], built as source text and parsed.
expr::Expression random_polynomial(std::mt19937_64& rng, int dimension, int degree);

/// Gradient, Hessian and the Jacobian of (|Dv|^2+eps)^(beta/2) Dv, each
/// obtained by symbolic differentiation.
struct SymbolicStretch {
  SymbolicStretch(const expr::Expression& v, const diffops::StretchParams& s);

  Vec gradient(std::span<const double> x) const;
  Mat hessian(std::span<const double> x) const;
  Vec field(std::span<const double> x) const;
  Mat jacobian(std::span<const double> x) const;

  int dimension;
  std::vector<expr::Expression> dv;
  std::vector<expr::Expression> d2v;
  std::vector<expr::Expression> f;
  std::vector<expr::Expression> df;
};

IdentitySuiteResult run_identity_suite(const IdentitySuiteOptions& options);

}  // namespace pxlab::theory
