#pragma once

#include <optional>
#include <vector>

#include <Eigen/Geometry>

#include "groundsurf/point_cloud.hpp"
#include "groundsurf/types.hpp"

namespace groundsurf {

inline constexpr double kDefaultNzMin = 1e-3;
inline constexpr int kDefaultMinPoints = 4;

/// Local ground plane: centroid plus unit normal with positive z component.
struct Slope {
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();

  /// Height of the plane at (x, y).
  double height(double x, double y) const {
    return centroid.z() -
           (normal.x() * (x - centroid.x()) + normal.y() * (y - centroid.y())) / normal.z();
  }
  double height(const Vec2& p) const { return height(p.x(), p.y()); }
  /// Constant gradient dz/dx, dz/dy of the plane.
  Vec2 gradient() const { return Vec2(-normal.x(), -normal.y()) / normal.z(); }

  /// Slope passing through (x, y, z) with surface gradient g.
  static Slope from_gradient(const Vec3& point, const Vec2& g) {
    return Slope{point, Vec3(-g.x(), -g.y(), 1.0).normalized()};
  }
};

/// Mergeable moment accumulator for a total least squares plane fit.
/// Moments are taken about an anchor point to limit cancellation.
class CellAccumulator {
 public:
  CellAccumulator() = default;
  explicit CellAccumulator(const Vec3& anchor) : anchor_(anchor) {}

  void add(const Vec3& p);
  /// Both accumulators must share the same anchor.
  void merge(const CellAccumulator& other);

  long count() const { return count_; }
  const Vec3& anchor() const { return anchor_; }
  /// Sums of (p - anchor).
  const Vec3& sum() const { return sum_; }
  /// Second moments of (p - anchor) in the order xx, yy, zz, xy, xz, yz.
  const Eigen::Matrix<double, 6, 1>& second_moments() const { return moments_; }

  Vec3 mean() const;
  /// Centered covariance (divided by count).
  Mat3 covariance() const;

 private:
  Vec3 anchor_ = Vec3::Zero();
  long count_ = 0;
  Vec3 sum_ = Vec3::Zero();
  Eigen::Matrix<double, 6, 1> moments_ = Eigen::Matrix<double, 6, 1>::Zero();
};

struct FitOptions {
  int min_points = kDefaultMinPoints;
  double nz_min = kDefaultNzMin;
};

/// Total least squares plane through the accumulated points, or nullopt when
/// the cell is undersampled or the plane is too steep to be z = f(x, y).
std::optional<Slope> fit_plane_total_lsqr(const CellAccumulator& acc,
                                          const FitOptions& opts = {});

/// Same fit for an explicit point set (columns).
std::optional<Slope> fit_plane_total_lsqr(const Eigen::Ref<const Eigen::Matrix3Xd>& points,
                                          const FitOptions& opts = {});

/// Regular grid of optional slopes. Level L cells cover 2^L x 2^L level-0
/// cells; every coordinate is expressed in level-0 scaled units.
class SlopeGrid {
 public:
  SlopeGrid() = default;
  SlopeGrid(int nx, int ny, int level = 0, int min_points = kDefaultMinPoints);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int level() const { return level_; }
  int min_points() const { return min_points_; }
  /// Edge length of one cell in level-0 units.
  double cell_size() const { return static_cast<double>(1 << level_); }

  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
  std::optional<Slope>& at(int i, int j) { return cells_[index(i, j)]; }
  const std::optional<Slope>& at(int i, int j) const { return cells_[index(i, j)]; }
  bool is_hole(int i, int j) const { return !at(i, j).has_value(); }

  int hole_count() const;
  int slope_count() const { return nx_ * ny_ - hole_count(); }

  Eigen::AlignedBox2d footprint(int i, int j) const;
  Vec2 cell_center(int i, int j) const { return footprint(i, j).center(); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }

 private:
  int nx_ = 0;
  int ny_ = 0;
  int level_ = 0;
  int min_points_ = kDefaultMinPoints;
  std::vector<std::optional<Slope>> cells_;
};

/// Finest level first; the last level is hole-free.
struct SlopePyramid {
  std::vector<SlopeGrid> levels;

  const SlopeGrid& top() const { return levels.back(); }
  std::size_t depth() const { return levels.size(); }
};

/// Accumulators in SlopeGrid cell order (row-major, i fastest). A point with
/// scaled u == nx is closed into column nx - 1; likewise v.
std::vector<CellAccumulator> bin_points(const PointCloud& scaled, int nx, int ny);

/// Level-0 slope grid. Throws Error("no ground data") when every cell is a hole.
SlopeGrid fit_grid(const PointCloud& scaled, int nx, int ny, const FitOptions& opts = {});

/// Corners of the footprint lifted onto the slope's plane (counter-clockwise from min corner).
Eigen::Matrix<double, 3, 4> slope_vertices(const Slope& s, const Eigen::AlignedBox2d& footprint);

/// One level up: each coarse cell refits the vertices of its (up to four) fine slopes.
SlopeGrid coarsen(const SlopeGrid& grid, double nz_min = kDefaultNzMin);

/// Coarsens until the first hole-free level.
SlopePyramid build_pyramid(const SlopeGrid& grid, double nz_min = kDefaultNzMin);

/// 3x3 mean filter over present neighbors; holes remain holes.
SlopeGrid kernel_smooth(const SlopeGrid& grid);

/// Level `fine` with holes replaced by slopes projected from `parent`, one
/// level coarser. Present slopes are copied unchanged.
SlopeGrid project_into_holes(const SlopeGrid& fine, const SlopeGrid& parent);

/// Top-down fill: smooth the current level, project it into the holes of the
/// next finer level, repeat. Returns the smoothed, hole-free level 0.
SlopeGrid fill_holes_hierarchical(const SlopePyramid& pyramid);

}  // namespace groundsurf
