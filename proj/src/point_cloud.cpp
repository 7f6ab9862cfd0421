#include "groundsurf/point_cloud.hpp"

#include <algorithm>
#include <cmath>

namespace groundsurf {

GridTransform make_transform(const PointCloud& cloud, const Vec2& spacing) {
  if (!(spacing.x() > 0.0) || !(spacing.y() > 0.0)) {
    throw Error("grid spacing must be positive");
  }
  if (cloud.empty()) throw Error("cannot build a grid for an empty cloud");

  const Vec2 lo = cloud.xyz.topRows<2>().rowwise().minCoeff();
  const Vec2 hi = cloud.xyz.topRows<2>().rowwise().maxCoeff();
  GridTransform t;
  t.origin = lo;
  t.spacing = spacing;
  const Vec2 extent = (hi - lo).cwiseQuotient(spacing);
  t.nx = std::max(1, static_cast<int>(std::ceil(extent.x())));
  t.ny = std::max(1, static_cast<int>(std::ceil(extent.y())));
  return t;
}

PointCloud to_grid_coords(const PointCloud& cloud, const GridTransform& t) {
  PointCloud out = cloud;
  out.xyz.topRows<2>() = (cloud.xyz.topRows<2>().colwise() - t.origin).array().colwise() /
                         t.spacing.array();
  return out;
}

PointCloud from_grid_coords(const PointCloud& cloud, const GridTransform& t) {
  PointCloud out = cloud;
  out.xyz.topRows<2>() =
      (cloud.xyz.topRows<2>().array().colwise() * t.spacing.array()).matrix().colwise() +
      t.origin;
  return out;
}

}  // namespace groundsurf
