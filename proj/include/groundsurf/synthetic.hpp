#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Geometry>

#include "groundsurf/point_cloud.hpp"

namespace groundsurf {

struct Bump {
  Vec2 center;
  double amplitude;
  double sigma;
};

/// Tilted plane plus Gaussian bumps, sampled uniformly outside hole regions.
/// Stands in for a small terrestrial scan of a river bar.
struct SyntheticTerrain {
  Vec2 extent{32.0, 16.0};
  Vec2 tilt{0.05, 0.02};
  double base = 10.0;
  std::vector<Bump> bumps{{Vec2(8.0, 6.0), 1.2, 3.5},
                          {Vec2(20.0, 10.0), -0.8, 4.0},
                          {Vec2(27.0, 4.0), 0.6, 2.5}};
  std::vector<Eigen::AlignedBox2d> holes{
      Eigen::AlignedBox2d(Vec2(12.0, 4.0), Vec2(16.0, 8.0)),
      Eigen::AlignedBox2d(Vec2(22.0, 11.0), Vec2(25.0, 14.0)),
      Eigen::AlignedBox2d(Vec2(0.0, 13.0), Vec2(4.0, 16.0))};
  long points = 15666;
  double noise = 0.01;
  std::uint64_t seed = 1;

  double height(double x, double y) const;
  bool in_hole(double x, double y) const;
  /// Exactly `points` samples in survey units; deterministic in `seed`.
  PointCloud generate() const;
};

}  // namespace groundsurf
