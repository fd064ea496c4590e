#include "pxlab/diffops.hpp"

#include <cmath>

#include "pxlab/parallel.hpp"

namespace pxlab::diffops {

namespace {

struct Tap {
  int offset;
  double weight;
};

struct Stencil {
  Tap taps[4];
  int size = 0;
};

Stencil first_derivative(int i, int m, double h) {
  Stencil s;
  if (i > 0 && i < m - 1) {
    s.taps[0] = {-1, -0.5 / h};
    s.taps[1] = {1, 0.5 / h};
    s.size = 2;
  } else if (i == 0) {
    s.taps[0] = {0, -1.5 / h};
    s.taps[1] = {1, 2.0 / h};
    s.taps[2] = {2, -0.5 / h};
    s.size = 3;
  } else {
    s.taps[0] = {0, 1.5 / h};
    s.taps[1] = {-1, -2.0 / h};
    s.taps[2] = {-2, 0.5 / h};
    s.size = 3;
  }
  return s;
}

Stencil second_derivative(int i, int m, double h) {
  const double h2 = h * h;
  Stencil s;
  if (i > 0 && i < m - 1) {
    s.taps[0] = {-1, 1.0 / h2};
    s.taps[1] = {0, -2.0 / h2};
    s.taps[2] = {1, 1.0 / h2};
    s.size = 3;
  } else {
    const int dir = i == 0 ? 1 : -1;
    s.taps[0] = {0, 2.0 / h2};
    s.taps[1] = {dir, -5.0 / h2};
    s.taps[2] = {2 * dir, 4.0 / h2};
    s.taps[3] = {3 * dir, -1.0 / h2};
    s.size = 4;
  }
  return s;
}

void require_stencil_room(const GridSpec& grid) {
  for (int a = 0; a < grid.dimension(); ++a) {
    if (grid.points(a) < 4) throw PreconditionError("grid too small for difference stencils");
  }
}

// Interior node whose 3^n neighbourhood is valid in the input.
template <class T>
bool stencil_valid(const Field<T>& f, std::size_t node) {
  const GridSpec& g = f.grid;
  if (g.boundary_distance(node) < 1) return false;
  const int kz = g.dimension() == 3 ? 1 : 0;
  for (int k = -kz; k <= kz; ++k)
    for (int j = -1; j <= 1; ++j)
      for (int i = -1; i <= 1; ++i) {
        const auto n = static_cast<std::ptrdiff_t>(node) + i * static_cast<std::ptrdiff_t>(g.stride(0)) +
                       j * static_cast<std::ptrdiff_t>(g.stride(1)) + k * static_cast<std::ptrdiff_t>(g.stride(2));
        if (!f.is_valid(static_cast<std::size_t>(n))) return false;
      }
  return true;
}

template <class T, class Fn>
auto apply_first(const Field<T>& f, std::size_t node, int axis, Fn&& value_at) {
  const GridSpec& g = f.grid;
  const Index3 ijk = g.multi_index(node);
  const Stencil s = first_derivative(ijk[axis], g.points(axis), g.spacing(axis));
  decltype(value_at(node)) acc = s.taps[0].weight * value_at(node + 0);
  acc *= 0.0;
  for (int t = 0; t < s.size; ++t) {
    const auto n = static_cast<std::ptrdiff_t>(node) + s.taps[t].offset * static_cast<std::ptrdiff_t>(g.stride(axis));
    acc += s.taps[t].weight * value_at(static_cast<std::size_t>(n));
  }
  return acc;
}

}  // namespace

void StretchParams::validate() const {
  if (!(beta > -1.0)) throw PreconditionError("stretch exponent beta must exceed -1");
  if (!(eps >= 0.0)) throw PreconditionError("regularization eps must be nonnegative");
  if (eps == 0.0 && beta < 0.0) throw PreconditionError("eps = 0 requires beta >= 0");
}

VectorField gradient(const ScalarField& v) {
  const GridSpec& g = v.grid;
  require_stencil_room(g);
  VectorField out(g, Vec::Zero());
  parallel_for(g.node_count(), [&](std::size_t node) {
    Vec d = Vec::Zero();
    for (int a = 0; a < g.dimension(); ++a) {
      d[a] = apply_first(v, node, a, [&](std::size_t n) { return v[n]; });
    }
    out[node] = d;
    out.valid[node] = stencil_valid(v, node) ? 1 : 0;
  });
  return out;
}

MatrixField hessian(const ScalarField& v) {
  const GridSpec& g = v.grid;
  require_stencil_room(g);
  MatrixField out(g, Mat::Zero());
  parallel_for(g.node_count(), [&](std::size_t node) {
    const Index3 ijk = g.multi_index(node);
    Mat hm = Mat::Zero();
    for (int a = 0; a < g.dimension(); ++a) {
      const Stencil s = second_derivative(ijk[a], g.points(a), g.spacing(a));
      double acc = 0.0;
      for (int t = 0; t < s.size; ++t) {
        const auto n = static_cast<std::ptrdiff_t>(node) + s.taps[t].offset * static_cast<std::ptrdiff_t>(g.stride(a));
        acc += s.taps[t].weight * v[static_cast<std::size_t>(n)];
      }
      hm(a, a) = acc;
      for (int b = a + 1; b < g.dimension(); ++b) {
        // D_a(D_b v); on interior nodes this is the 4-point cross stencil.
        const double mixed = apply_first(v, node, a, [&](std::size_t n) {
          return apply_first(v, n, b, [&](std::size_t m) { return v[m]; });
        });
        hm(a, b) = hm(b, a) = mixed;
      }
    }
    out[node] = hm;
    out.valid[node] = stencil_valid(v, node) ? 1 : 0;
  });
  return out;
}

ScalarField laplacian(const ScalarField& v) {
  const MatrixField h = hessian(v);
  ScalarField out(v.grid, 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = h[n].trace();
    out.valid[n] = h.valid[n];
  }
  return out;
}

ScalarField infinity_laplacian(const ScalarField& v) {
  const MatrixField h = hessian(v);
  const VectorField d = gradient(v);
  ScalarField out(v.grid, 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = d[n].dot(h[n] * d[n]);
    out.valid[n] = h.valid[n] && d.valid[n];
  }
  return out;
}

Vec stretch(const Vec& g, const StretchParams& s) {
  const double q = g.squaredNorm() + s.eps;
  if (q == 0.0) return Vec::Zero();
  return std::pow(q, 0.5 * s.beta) * g;
}

VectorField stretched_gradient(const ScalarField& v, const StretchParams& s) {
  s.validate();
  VectorField out = gradient(v);
  for (auto& d : out.values) d = stretch(d, s);
  return out;
}

MatrixField jacobian(const VectorField& field) {
  const GridSpec& g = field.grid;
  require_stencil_room(g);
  MatrixField out(g, Mat::Zero());
  parallel_for(g.node_count(), [&](std::size_t node) {
    Mat m = Mat::Zero();
    for (int j = 0; j < g.dimension(); ++j) {
      const Vec col = apply_first(field, node, j, [&](std::size_t n) -> Vec { return field[n]; });
      m.col(j) = col;
    }
    out[node] = m;
    out.valid[node] = stencil_valid(field, node) ? 1 : 0;
  });
  return out;
}

double sigma2(const Mat& m, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) s += m(i, i) * m(j, j) - m(i, j) * m(j, i);
  return -s;
}

ScalarField sigma2(const MatrixField& m) {
  ScalarField out(m.grid, 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = sigma2(m[n], m.grid.dimension());
    out.valid[n] = m.valid[n];
  }
  return out;
}

double frobenius_sq(const Mat& m) { return m.squaredNorm(); }

double det2(const Mat& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

}  // namespace pxlab::diffops
