#include "pxlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pxlab/parallel.hpp"

namespace pxlab {

GridSpec::GridSpec(int dimension, std::array<double, 3> lower, std::array<double, 3> upper, Index3 points)
    : dimension_(dimension), lower_(lower), upper_(upper), points_(points) {
  if (dimension != 2 && dimension != 3) throw PreconditionError("grid dimension must be 2 or 3");
  double hmin = 0.0;
  double hmax = 0.0;
  node_count_ = 1;
  for (int a = 0; a < 3; ++a) {
    if (a >= dimension_) {
      lower_[a] = upper_[a] = 0.0;
      points_[a] = 1;
      spacing_[a] = 0.0;
      stride_[a] = node_count_;
      continue;
    }
    if (!(upper_[a] > lower_[a])) throw PreconditionError("grid axis " + std::to_string(a + 1) + " has upper <= lower");
    if (points_[a] < 8) throw PreconditionError("grid axis " + std::to_string(a + 1) + " needs at least 8 points");
    spacing_[a] = (upper_[a] - lower_[a]) / (points_[a] - 1);
    stride_[a] = node_count_;
    node_count_ *= static_cast<std::size_t>(points_[a]);
    hmin = a == 0 ? spacing_[a] : std::min(hmin, spacing_[a]);
    hmax = std::max(hmax, spacing_[a]);
  }
  if (hmax > 2.0 * hmin) throw PreconditionError("grid spacings differ by more than a factor 2");
}

GridSpec GridSpec::cube(int dimension, double lower, double upper, int points) {
  return GridSpec(dimension, {lower, lower, lower}, {upper, upper, upper}, {points, points, points});
}

double GridSpec::max_spacing() const {
  return *std::max_element(spacing_.begin(), spacing_.begin() + dimension_);
}

double GridSpec::min_width() const {
  double w = upper_[0] - lower_[0];
  for (int a = 1; a < dimension_; ++a) w = std::min(w, upper_[a] - lower_[a]);
  return w;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dimension_; ++a) v *= spacing_[a];
  return v;
}

std::size_t GridSpec::index(const Index3& ijk) const {
  return static_cast<std::size_t>(ijk[0]) * stride_[0] + static_cast<std::size_t>(ijk[1]) * stride_[1] +
         static_cast<std::size_t>(ijk[2]) * stride_[2];
}

Index3 GridSpec::multi_index(std::size_t node) const {
  Index3 ijk{0, 0, 0};
  for (int a = 0; a < dimension_; ++a) ijk[a] = static_cast<int>((node / stride_[a]) % points_[a]);
  return ijk;
}

Vec GridSpec::coordinates(std::size_t node) const {
  const Index3 ijk = multi_index(node);
  Vec x = Vec::Zero();
  for (int a = 0; a < dimension_; ++a) x[a] = lower_[a] + ijk[a] * spacing_[a];
  return x;
}

int GridSpec::boundary_distance(std::size_t node) const {
  const Index3 ijk = multi_index(node);
  int d = ijk[0];
  for (int a = 0; a < dimension_; ++a) d = std::min({d, ijk[a], points_[a] - 1 - ijk[a]});
  return d;
}

bool GridSpec::operator==(const GridSpec& o) const {
  return dimension_ == o.dimension_ && lower_ == o.lower_ && upper_ == o.upper_ && points_ == o.points_;
}

void require_inside(const GridSpec& grid, const BallRegion& ball) {
  const double r = ball.scaled_radius();
  if (!(ball.radius > 0.0) || !(r > 0.0)) throw PreconditionError("ball radius must be positive");
  for (int a = 0; a < grid.dimension(); ++a) {
    const double margin = 2.0 * grid.spacing(a);
    if (ball.center[a] - r < grid.lower(a) + margin || ball.center[a] + r > grid.upper(a) - margin) {
      throw PreconditionError("ball of radius " + std::to_string(r) + " leaves the grid interior on axis " +
                              std::to_string(a + 1));
    }
  }
}

ScalarField sample(const expr::Expression& e, const GridSpec& grid) {
  if (e.dimension() != grid.dimension()) throw PreconditionError("expression and grid dimensions differ");
  ScalarField out(grid, 0.0);
  parallel_for(grid.node_count(), [&](std::size_t node) {
    const Vec x = grid.coordinates(node);
    try {
      out[node] = expr::evaluate(e, std::span<const double>(x.data(), 3));
    } catch (const expr::DomainError& err) {
      throw expr::DomainError(std::string(err.what()) + " at node " + std::to_string(node) + " (" +
                                  std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " + std::to_string(x[2]) +
                                  ")",
                              err.subexpression());
    }
  });
  return out;
}

namespace {

struct KernelTap {
  std::ptrdiff_t offset;
  double weight;
};

std::vector<KernelTap> mollifier_taps(const GridSpec& grid, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("mollification radius must be positive");
  if (eps < 2.0 * grid.max_spacing()) throw PreconditionError("mollification radius below twice the grid spacing");
  if (eps > 0.5 * grid.min_width()) throw PreconditionError("mollification radius exceeds half the domain width");
  Index3 reach{0, 0, 0};
  for (int a = 0; a < grid.dimension(); ++a) reach[a] = static_cast<int>(std::floor(eps / grid.spacing(a)));
  std::vector<KernelTap> taps;
  double total = 0.0;
  for (int k = -reach[2]; k <= reach[2]; ++k)
    for (int j = -reach[1]; j <= reach[1]; ++j)
      for (int i = -reach[0]; i <= reach[0]; ++i) {
        const double dx = i * grid.spacing(0);
        const double dy = j * grid.spacing(1);
        const double dz = grid.dimension() == 3 ? k * grid.spacing(2) : 0.0;
        const double q = (dx * dx + dy * dy + dz * dz) / (eps * eps);
        if (q >= 1.0) continue;
        const double w = std::exp(-1.0 / (1.0 - q));
        const auto offset = static_cast<std::ptrdiff_t>(i) * static_cast<std::ptrdiff_t>(grid.stride(0)) +
                            static_cast<std::ptrdiff_t>(j) * static_cast<std::ptrdiff_t>(grid.stride(1)) +
                            static_cast<std::ptrdiff_t>(k) * static_cast<std::ptrdiff_t>(grid.stride(2));
        taps.push_back({offset, w});
        total += w;
      }
  for (auto& t : taps) t.weight /= total;
  return taps;
}

bool has_kernel_support(const GridSpec& grid, std::size_t node, double eps) {
  const Vec x = grid.coordinates(node);
  for (int a = 0; a < grid.dimension(); ++a) {
    if (x[a] - eps < grid.lower(a) - 1e-12 || x[a] + eps > grid.upper(a) + 1e-12) return false;
  }
  return true;
}

template <class T>
Field<T> mollify_impl(const Field<T>& field, double eps, const T& zero) {
  const GridSpec& grid = field.grid;
  const auto taps = mollifier_taps(grid, eps);
  Field<T> out = field;
  parallel_for(grid.node_count(), [&](std::size_t node) {
    if (!has_kernel_support(grid, node, eps)) {
      out.valid[node] = 0;
      return;
    }
    T acc = zero;
    bool ok = field.is_valid(node);
    for (const auto& t : taps) {
      const auto src = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + t.offset);
      ok = ok && field.is_valid(src);
      acc += t.weight * field[src];
    }
    out[node] = acc;
    out.valid[node] = ok ? 1 : 0;
    if (!ok) out[node] = field[node];
  });
  return out;
}

}  // namespace

ScalarField mollify(const ScalarField& field, double eps) { return mollify_impl(field, eps, 0.0); }

VectorField mollify(const VectorField& field, double eps) {
  return mollify_impl<Vec>(field, eps, Vec::Zero());
}

double cutoff_profile(double distance, double radius) {
  const double inner = 0.5 * radius;
  const double outer = 0.75 * radius;
  if (distance <= inner) return 1.0;
  if (distance >= outer) return 0.0;
  const double t = (outer - distance) / (outer - inner);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

ScalarField cutoff(const BallRegion& ball, const GridSpec& grid) {
  require_inside(grid, ball.scaled(0.75));
  ScalarField phi(grid, 0.0);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    phi[node] = cutoff_profile((grid.coordinates(node) - ball.center).norm(), ball.radius);
  }
  return phi;
}

std::vector<std::size_t> ball_nodes(const GridSpec& grid, const BallRegion& ball) {
  const double r = ball.scaled_radius();
  Index3 lo{0, 0, 0};
  Index3 hi{0, 0, 0};
  for (int a = 0; a < grid.dimension(); ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((ball.center[a] - r - grid.lower(a)) / grid.spacing(a))));
    hi[a] = std::min(grid.points(a) - 1,
                     static_cast<int>(std::ceil((ball.center[a] + r - grid.lower(a)) / grid.spacing(a))));
  }
  std::vector<std::size_t> nodes;
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const std::size_t node = grid.index({i, j, k});
        if ((grid.coordinates(node) - ball.center).norm() <= r * (1.0 + 1e-12)) nodes.push_back(node);
      }
  return nodes;
}

double ball_integral(const ScalarField& field, const BallRegion& ball) {
  require_inside(field.grid, ball);
  const auto nodes = ball_nodes(field.grid, ball);
  if (nodes.empty()) throw PreconditionError("ball contains no grid nodes");
  double sum = 0.0;
  for (auto n : nodes) sum += field[n];
  return sum * field.grid.cell_volume();
}

double ball_average(const ScalarField& field, const BallRegion& ball) {
  require_inside(field.grid, ball);
  const auto nodes = ball_nodes(field.grid, ball);
  if (nodes.empty()) throw PreconditionError("ball contains no grid nodes");
  double sum = 0.0;
  for (auto n : nodes) sum += field[n];
  return sum / static_cast<double>(nodes.size());
}

}  // namespace pxlab
