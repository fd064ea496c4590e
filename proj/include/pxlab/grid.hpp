#pragma once

// Uniform Cartesian grids on boxes and the fields sampled on them.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "pxlab/errors.hpp"
#include "pxlab/expr.hpp"

namespace pxlab {

// Points, vectors and matrices are stored at their 3D size; in two
// dimensions the third coordinate, row and column are zero.
using Vec = Eigen::Vector3d;
using Mat = Eigen::Matrix3d;

using Index3 = std::array<int, 3>;

/// Axis-aligned box [lower_i, upper_i] with points_i nodes per axis.
/// Requires points_i >= 8, upper_i > lower_i and spacings within a factor
/// two of each other.
class GridSpec {
 public:
  GridSpec(int dimension, std::array<double, 3> lower, std::array<double, 3> upper, Index3 points);

  /// Same interval and node count on every axis.
  static GridSpec cube(int dimension, double lower, double upper, int points);

  int dimension() const noexcept { return dimension_; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  int points(int axis) const { return points_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double max_spacing() const;
  double min_width() const;
  /// Volume of the cell owned by one node (product of spacings).
  double cell_volume() const;

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t stride(int axis) const { return stride_[axis]; }
  std::size_t index(const Index3& ijk) const;
  Index3 multi_index(std::size_t node) const;
  Vec coordinates(std::size_t node) const;
  /// Number of nodes between `node` and the nearest box face.
  int boundary_distance(std::size_t node) const;

  bool operator==(const GridSpec& other) const;

 private:
  int dimension_;
  std::array<double, 3> lower_;
  std::array<double, 3> upper_;
  Index3 points_;
  std::array<double, 3> spacing_{};
  std::array<std::size_t, 3> stride_{};
  std::size_t node_count_ = 0;
};

/// One value per node plus a per-node validity flag. Derived fields mark
/// nodes invalid where their stencil left the interior or touched invalid
/// input.
template <class T>
struct Field {
  GridSpec grid;
  std::vector<T> values;
  std::vector<std::uint8_t> valid;

  Field(GridSpec g, const T& init) : grid(std::move(g)), values(grid.node_count(), init), valid(grid.node_count(), 1) {}

  std::size_t size() const noexcept { return values.size(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }
  bool is_valid(std::size_t i) const { return valid[i] != 0; }
};

using ScalarField = Field<double>;
using VectorField = Field<Vec>;
using MatrixField = Field<Mat>;

/// The ball B(center, scale * radius). `radius` is the R of the ball the
/// estimates refer to; `scale` selects the concentric sub-ball.
struct BallRegion {
  Vec center = Vec::Zero();
  double radius = 1.0;
  double scale = 1.0;

  double scaled_radius() const { return scale * radius; }
  BallRegion scaled(double s) const { return {center, radius, s}; }
};

/// Throws unless the scaled ball stays at least two nodes away from every face.
void require_inside(const GridSpec& grid, const BallRegion& ball);

ScalarField sample(const expr::Expression& e, const GridSpec& grid);

/// Convolution with the normalized bump exp(-1/(1-|x/eps|^2)) supported in
/// B(0, eps). Nodes without full kernel support keep the input value and are
/// flagged invalid. Requires 2 * max spacing <= eps <= min width / 2.
ScalarField mollify(const ScalarField& field, double eps);
VectorField mollify(const VectorField& field, double eps);

/// Radial cutoff: 1 on B(z, R/2), 0 outside B(z, 3R/4), and the quintic
/// smoothstep S(t) = t^3 (10 - 15 t + 6 t^2), t = (3R/4 - r) / (R/4), on the
/// annulus. Its slope never exceeds 7.5 / R.
ScalarField cutoff(const BallRegion& ball, const GridSpec& grid);
double cutoff_profile(double distance, double radius);

/// Nodes whose coordinates lie in the closed scaled ball, in index order.
std::vector<std::size_t> ball_nodes(const GridSpec& grid, const BallRegion& ball);

/// Midpoint rule: each node in the ball contributes value * cell volume.
double ball_integral(const ScalarField& field, const BallRegion& ball);
/// ball_integral divided by the measured discrete ball volume.
double ball_average(const ScalarField& field, const BallRegion& ball);

}  // namespace pxlab
