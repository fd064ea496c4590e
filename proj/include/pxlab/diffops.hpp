#pragma once

// Finite-difference operators and the matrix invariants used by the
// estimates.
//
// Interior nodes use second-order central differences; the mixed partial is
// the 4-point cross stencil, so the discrete Hessian is exactly symmetric.
// Boundary nodes use second-order one-sided stencils and are flagged invalid
// in the result.

#include "pxlab/grid.hpp"

namespace pxlab::diffops {

/// Exponent beta and regularization eps of (|Dv|^2 + eps)^(beta/2) Dv.
struct StretchParams {
  double beta = 0.0;
  double eps = 0.0;

  /// Throws unless beta > -1, eps >= 0, and (eps > 0 or beta >= 0).
  void validate() const;
};

VectorField gradient(const ScalarField& v);
MatrixField hessian(const ScalarField& v);
ScalarField laplacian(const ScalarField& v);
/// <D^2v Dv, Dv>
ScalarField infinity_laplacian(const ScalarField& v);

/// (|g|^2 + eps)^(beta/2) g; the zero vector when eps = 0 and g = 0.
Vec stretch(const Vec& g, const StretchParams& s);
VectorField stretched_gradient(const ScalarField& v, const StretchParams& s);

/// Row i holds the discrete gradient of component i: M(i, j) = d_j F_i.
MatrixField jacobian(const VectorField& field);

/// -sum_{i<j} (m_ii m_jj - m_ij m_ji) over the leading n x n block.
double sigma2(const Mat& m, int n);
ScalarField sigma2(const MatrixField& m);
double frobenius_sq(const Mat& m);
/// Determinant of the leading 2 x 2 block.
double det2(const Mat& m);

}  // namespace pxlab::diffops
