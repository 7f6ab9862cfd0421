#include "groundsurf/synthetic.hpp"

#include <cmath>
#include <random>

namespace groundsurf {

double SyntheticTerrain::height(double x, double y) const {
  double z = base + tilt.x() * x + tilt.y() * y;
  for (const auto& b : bumps) {
    const double r2 = (Vec2(x, y) - b.center).squaredNorm();
    z += b.amplitude * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
  }
  return z;
}

bool SyntheticTerrain::in_hole(double x, double y) const {
  for (const auto& h : holes) {
    if (h.contains(Vec2(x, y))) return true;
  }
  return false;
}

PointCloud SyntheticTerrain::generate() const {
  if (points <= 0 || !(extent.x() > 0.0) || !(extent.y() > 0.0)) {
    throw Error("synthetic terrain needs positive extent and point count");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, extent.x());
  std::uniform_real_distribution<double> uy(0.0, extent.y());
  std::normal_distribution<double> dz(0.0, noise > 0.0 ? noise : 1.0);

  Eigen::Matrix3Xd xyz(3, points);
  long k = 0;
  long attempts = 0;
  while (k < points) {
    if (++attempts > 1000 * points) throw Error("hole regions cover the synthetic extent");
    const double x = ux(rng);
    const double y = uy(rng);
    if (in_hole(x, y)) continue;
    const double e = noise > 0.0 ? dz(rng) : 0.0;
    xyz.col(k++) << x, y, height(x, y) + e;
  }
  return PointCloud(std::move(xyz));
}

}  // namespace groundsurf
