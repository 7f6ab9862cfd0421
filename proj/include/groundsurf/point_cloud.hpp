#pragma once

#include <Eigen/Core>

#include "groundsurf/types.hpp"

namespace groundsurf {

/// Points stored column-wise; x and y either in survey units or in scaled
/// grid units depending on the pipeline stage.
struct PointCloud {
  Eigen::Matrix3Xd xyz;

  PointCloud() = default;
  explicit PointCloud(Eigen::Matrix3Xd points) : xyz(std::move(points)) {}

  Eigen::Index size() const { return xyz.cols(); }
  bool empty() const { return xyz.cols() == 0; }
  auto point(Eigen::Index k) const { return xyz.col(k); }
};

/// Maps survey (x, y) onto a grid whose cells have unit size.
struct GridTransform {
  Vec2 origin = Vec2::Zero();
  Vec2 spacing = Vec2::Ones();
  int nx = 1;
  int ny = 1;

  Vec2 to_grid(const Vec2& p) const { return (p - origin).cwiseQuotient(spacing); }
  Vec2 from_grid(const Vec2& u) const { return origin + u.cwiseProduct(spacing); }
};

/// Origin at the cloud's minimum corner, dims = ceil(extent / spacing) with a minimum of 1.
GridTransform make_transform(const PointCloud& cloud, const Vec2& spacing);

PointCloud to_grid_coords(const PointCloud& cloud, const GridTransform& t);
PointCloud from_grid_coords(const PointCloud& cloud, const GridTransform& t);

}  // namespace groundsurf
