#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace groundsurf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Raised for malformed input, invalid configuration and numerical failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace groundsurf
