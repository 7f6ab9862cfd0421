#pragma once

#include <Eigen/Core>

#include "groundsurf/grid_model.hpp"
#include "groundsurf/types.hpp"

namespace groundsurf {

/// Kernel value, gradient and Hessian at a difference vector r.
template <typename Scalar>
struct KernelJet {
  Scalar value{0};
  Eigen::Matrix<Scalar, 2, 1> gradient = Eigen::Matrix<Scalar, 2, 1>::Zero();
  Eigen::Matrix<Scalar, 2, 2> hessian = Eigen::Matrix<Scalar, 2, 2>::Zero();
};

/// Hardy multiquadric sqrt(|r|^2 + c^2) with exact derivatives.
template <typename Scalar>
KernelJet<Scalar> mq_kernel(const Eigen::Matrix<Scalar, 2, 1>& r, Scalar c) {
  using std::sqrt;
  KernelJet<Scalar> k;
  k.value = sqrt(r.squaredNorm() + c * c);
  k.gradient = r / k.value;
  k.hessian = Eigen::Matrix<Scalar, 2, 2>::Identity() / k.value -
              r * r.transpose() / (k.value * k.value * k.value);
  return k;
}

/// Heights and gradients at scattered sites (columns).
struct HermiteData {
  Eigen::Matrix2Xd sites;
  Eigen::VectorXd values;
  Eigen::Matrix2Xd gradients;

  Eigen::Index size() const { return sites.cols(); }
  /// Throws Error on size mismatch, non-finite entries or coincident sites.
  void validate() const;
};

inline constexpr double kDuplicateSiteDistance = 1e-9;
inline constexpr Eigen::Index kMaxHrbfUnknowns = 20000;
inline constexpr double kConditionWarn = 1e14;
inline constexpr double kConditionFail = 1e16;

struct HRBFConfig {
  /// Multiquadric shape parameter in scaled grid units.
  double c = 0.1;
  /// Total degree of the polynomial part: 0 (constant) or 1 (linear).
  int poly_degree = 0;

  Eigen::Index poly_terms() const { return poly_degree == 0 ? 1 : 3; }
  void validate() const;
};

/// Monomials 1, x, y evaluated at p (first `terms` entries).
Eigen::Vector3d monomials(const Vec2& p);
/// Rows d/dx, d/dy of the monomials.
Eigen::Matrix<double, 2, 3> monomial_gradients();

struct LinearSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

/// Symmetric saddle-point system with unknowns ordered (c_1..c_n,
/// d_1x, d_1y, .., d_nx, d_ny, a_1..a_L).
LinearSystem assemble_system(const HermiteData& data, const HRBFConfig& cfg);

struct HRBFModel {
  Eigen::Matrix2Xd sites;
  Eigen::VectorXd c;
  Eigen::Matrix2Xd d;
  Eigen::VectorXd a;
  HRBFConfig config;
  /// Reciprocal of the LU 1-norm reciprocal condition estimate.
  double condition_estimate = 0.0;

  double evaluate(const Vec2& x) const;
  Vec2 evaluate_gradient(const Vec2& x) const;
  /// Side condition residuals, one per monomial.
  Eigen::VectorXd side_condition() const;
};

/// Dense LU solve of the Hermite system. Throws Error when the system is
/// too large, singular, or its condition estimate exceeds kConditionFail.
HRBFModel solve_hrbf(const HermiteData& data, const HRBFConfig& cfg = {});

inline double evaluate(const HRBFModel& m, const Vec2& x) { return m.evaluate(x); }
inline Vec2 evaluate_gradient(const HRBFModel& m, const Vec2& x) { return m.evaluate_gradient(x); }

/// One site per present slope at its centroid; gradient from the normal.
HermiteData slopes_to_hermite(const SlopeGrid& grid);

/// Fit to the present slopes and synthesize slopes at the hole cell centers.
/// The fitted model is written to `model_out` when non-null.
SlopeGrid fill_holes_hrbf(const SlopeGrid& grid, const HRBFConfig& cfg = {},
                          HRBFModel* model_out = nullptr);

}  // namespace groundsurf
