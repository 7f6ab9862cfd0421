#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "groundsurf/grid_model.hpp"
#include "groundsurf/types.hpp"

namespace groundsurf {

/// Value with first and second derivative of a 1D function.
template <typename Scalar>
struct Jet1 {
  Scalar value{0};
  Scalar d1{0};
  Scalar d2{0};
};

/// Uniform cardinal cubic B-spline centered at 0, support [-2, 2], unit knot spacing.
template <typename Scalar>
Jet1<Scalar> cardinal_cubic_bspline(Scalar u) {
  using std::abs;
  const Scalar a = abs(u);
  const Scalar sgn = u < Scalar(0) ? Scalar(-1) : Scalar(1);
  Jet1<Scalar> r;
  if (a < Scalar(1)) {
    r.value = Scalar(2) / Scalar(3) - a * a + a * a * a / Scalar(2);
    r.d1 = sgn * (Scalar(-2) * a + Scalar(1.5) * a * a);
    r.d2 = Scalar(-2) + Scalar(3) * a;
  } else if (a < Scalar(2)) {
    const Scalar w = Scalar(2) - a;
    r.value = w * w * w / Scalar(6);
    r.d1 = -sgn * w * w / Scalar(2);
    r.d2 = w;
  }
  return r;
}

/// Blending function phi of a grid interval as a function of the offset d
/// from the interval center: half/one/half combination of the three cubic
/// B-splines on half-spaced knots around the center. Support |d| < 1.5.
template <typename Scalar>
Jet1<Scalar> bspline_phi_offset(Scalar d) {
  const Scalar u = Scalar(2) * d;
  const auto left = cardinal_cubic_bspline<Scalar>(u + Scalar(1));
  const auto mid = cardinal_cubic_bspline<Scalar>(u);
  const auto right = cardinal_cubic_bspline<Scalar>(u - Scalar(1));
  Jet1<Scalar> r;
  r.value = Scalar(0.5) * left.value + mid.value + Scalar(0.5) * right.value;
  r.d1 = Scalar(2) * (Scalar(0.5) * left.d1 + mid.d1 + Scalar(0.5) * right.d1);
  r.d2 = Scalar(4) * (Scalar(0.5) * left.d2 + mid.d2 + Scalar(0.5) * right.d2);
  return r;
}

/// phi_i(x) for grid interval i = [i, i+1), centered at i + 0.5.
template <typename Scalar>
Jet1<Scalar> bspline_phi(int i, Scalar x) {
  return bspline_phi_offset<Scalar>(x - (Scalar(i) + Scalar(0.5)));
}

/// Exponent beyond which the logistic form is clamped to its limits.
inline constexpr double kExpClamp = 700.0;

/// Compactly supported C-infinity bump: 1 at 0, 0 for |x| >= a,
/// 1 / (exp(s (1/(1-t) - 1/t)) + 1) with t = |x|/a in between.
/// The derivative is returned in d1; d2 is left at zero.
template <typename Scalar>
Jet1<Scalar> exp_phi_jet(Scalar x, Scalar s, Scalar a) {
  using std::abs;
  using std::exp;
  Jet1<Scalar> r;
  const Scalar t = abs(x) / a;
  if (t == Scalar(0)) {
    r.value = Scalar(1);
    return r;
  }
  if (t >= Scalar(1)) return r;
  const Scalar e = s * (Scalar(1) / (Scalar(1) - t) - Scalar(1) / t);
  if (e > Scalar(kExpClamp)) return r;
  if (e < Scalar(-kExpClamp)) {
    r.value = Scalar(1);
    return r;
  }
  const Scalar ee = exp(e);
  r.value = Scalar(1) / (ee + Scalar(1));
  const Scalar de_dt = s * (Scalar(1) / ((Scalar(1) - t) * (Scalar(1) - t)) + Scalar(1) / (t * t));
  const Scalar sgn = x < Scalar(0) ? Scalar(-1) : Scalar(1);
  // d/de of 1/(e^e + 1) = -1 / (e^e + 2 + e^-e)
  r.d1 = -de_dt * sgn / a / (ee + Scalar(2) + Scalar(1) / ee);
  return r;
}

template <typename Scalar>
Scalar exp_phi(Scalar x, Scalar s, Scalar a) {
  return exp_phi_jet<Scalar>(x, s, a).value;
}

enum class Basis { bspline, exponential };

struct BasisParams {
  Basis kind = Basis::bspline;
  double exp_s = 1.0;
  /// Support radius of the exponential bump in grid cells.
  double exp_a = 1.0;
};

/// Partition-of-unity blend of the planes of a hole-free level-0 slope grid.
/// Domain is [0, nx] x [0, ny] in scaled grid units.
class GroundSurface {
 public:
  GroundSurface(SlopeGrid grid, BasisParams basis = {});

  const SlopeGrid& grid() const { return grid_; }
  const BasisParams& basis() const { return basis_; }

  bool contains(double x, double y) const;

  /// Throws Error when (x, y) lies outside the domain.
  double eval(double x, double y) const;
  Vec2 gradient(double x, double y) const;

  /// Basis weight (with derivative) of the interval centered at index + 0.5.
  Jet1<double> weight(int index, double x) const;

  /// Containing cell with right/top edge closure.
  std::array<int, 2> cell_of(double x, double y) const;

  /// Slope used for neighbor (alpha, beta); indices are clamped into the grid.
  const Slope& neighbor_slope(int alpha, int beta) const;

 private:
  SlopeGrid grid_;
  BasisParams basis_;
};

double blend_eval(const GroundSurface& surface, double x, double y);
Vec2 blend_gradient(const GroundSurface& surface, double x, double y);

/// Uniform row-major samples (y outer, x inner) covering the closed domain.
struct Raster {
  int nx = 0;
  int ny = 0;
  Eigen::Matrix3Xd xyz;
};

Raster sample_surface(const GroundSurface& surface, int nx_samples, int ny_samples);

/// B-spline blends are piecewise polynomial of bidegree (4, 4) on the
/// half-cell pieces between knots. This caches those coefficients per piece
/// for fast evaluation; results match GroundSurface::eval.
class PolynomialSurface {
 public:
  explicit PolynomialSurface(const GroundSurface& surface);

  double eval(double x, double y) const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }

 private:
  using Coeffs = Eigen::Matrix<double, 5, 5>;
  int nx_ = 0;
  int ny_ = 0;
  // (2 nx) x (2 ny) half-cell pieces, local coordinates in [-1, 1]^2.
  std::vector<Coeffs> pieces_;
};

}  // namespace groundsurf
