#include "groundsurf/pu_surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <fmt/format.h>

namespace groundsurf {

GroundSurface::GroundSurface(SlopeGrid grid, BasisParams basis)
    : grid_(std::move(grid)), basis_(basis) {
  if (grid_.level() != 0) throw Error("surface blending needs a level-0 grid");
  if (grid_.hole_count() != 0) throw Error("surface blending needs a hole-free grid");
  if (basis_.kind == Basis::exponential) {
    // The blend visits three neighbors per axis, which covers supports up to 1.5 cells.
    if (!(basis_.exp_s > 0.0) || !(basis_.exp_a > 0.0) || basis_.exp_a > 1.5) {
      throw Error("exponential basis needs s > 0 and 0 < a <= 1.5");
    }
  }
}

bool GroundSurface::contains(double x, double y) const {
  return x >= 0.0 && x <= grid_.nx() && y >= 0.0 && y <= grid_.ny();
}

std::array<int, 2> GroundSurface::cell_of(double x, double y) const {
  return {std::min(static_cast<int>(std::floor(x)), grid_.nx() - 1),
          std::min(static_cast<int>(std::floor(y)), grid_.ny() - 1)};
}

Jet1<double> GroundSurface::weight(int index, double x) const {
  if (basis_.kind == Basis::bspline) return bspline_phi<double>(index, x);
  return exp_phi_jet<double>(x - (index + 0.5), basis_.exp_s, basis_.exp_a);
}

const Slope& GroundSurface::neighbor_slope(int alpha, int beta) const {
  return *grid_.at(std::clamp(alpha, 0, grid_.nx() - 1), std::clamp(beta, 0, grid_.ny() - 1));
}

double GroundSurface::eval(double x, double y) const {
  if (!contains(x, y)) throw Error(fmt::format("({}, {}) lies outside the surface domain", x, y));
  const auto [i, j] = cell_of(x, y);
  double wx[3];
  double wy[3];
  for (int k = 0; k < 3; ++k) {
    wx[k] = weight(i - 1 + k, x).value;
    wy[k] = weight(j - 1 + k, y).value;
  }
  double z = 0.0;
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 3; ++a) {
      const double w = wx[a] * wy[b];
      if (w != 0.0) z += w * neighbor_slope(i - 1 + a, j - 1 + b).height(x, y);
    }
  }
  return z;
}

Vec2 GroundSurface::gradient(double x, double y) const {
  if (!contains(x, y)) throw Error(fmt::format("({}, {}) lies outside the surface domain", x, y));
  const auto [i, j] = cell_of(x, y);
  Jet1<double> wx[3];
  Jet1<double> wy[3];
  for (int k = 0; k < 3; ++k) {
    wx[k] = weight(i - 1 + k, x);
    wy[k] = weight(j - 1 + k, y);
  }
  Vec2 g = Vec2::Zero();
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 3; ++a) {
      const Slope& s = neighbor_slope(i - 1 + a, j - 1 + b);
      const double h = s.height(x, y);
      const Vec2 sg = s.gradient();
      g.x() += sg.x() * wx[a].value * wy[b].value + h * wx[a].d1 * wy[b].value;
      g.y() += sg.y() * wx[a].value * wy[b].value + h * wx[a].value * wy[b].d1;
    }
  }
  return g;
}

double blend_eval(const GroundSurface& surface, double x, double y) { return surface.eval(x, y); }

Vec2 blend_gradient(const GroundSurface& surface, double x, double y) {
  return surface.gradient(x, y);
}

Raster sample_surface(const GroundSurface& surface, int nx_samples, int ny_samples) {
  if (nx_samples < 2 || ny_samples < 2) throw Error("sampling needs at least 2 samples per axis");
  const double w = surface.grid().nx();
  const double h = surface.grid().ny();
  auto coord = [](int k, int count, double extent) {
    return k == count - 1 ? extent : extent * k / (count - 1);
  };
  Raster r;
  r.nx = nx_samples;
  r.ny = ny_samples;
  r.xyz.resize(3, static_cast<Eigen::Index>(nx_samples) * ny_samples);
  Eigen::Index k = 0;
  for (int j = 0; j < ny_samples; ++j) {
    const double y = coord(j, ny_samples, h);
    for (int i = 0; i < nx_samples; ++i, ++k) {
      const double x = coord(i, nx_samples, w);
      r.xyz.col(k) << x, y, surface.eval(x, y);
    }
  }
  return r;
}

namespace {

constexpr int kDegree = 4;
constexpr int kNodes = kDegree + 1;

Eigen::Matrix<double, kNodes, 1> chebyshev_nodes() {
  Eigen::Matrix<double, kNodes, 1> xi;
  for (int k = 0; k < kNodes; ++k) xi[k] = std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * kNodes));
  return xi;
}

}  // namespace

PolynomialSurface::PolynomialSurface(const GroundSurface& surface)
    : nx_(surface.grid().nx()), ny_(surface.grid().ny()) {
  if (surface.basis().kind != Basis::bspline) {
    throw Error("polynomial form exists only for the B-spline basis");
  }
  const auto xi = chebyshev_nodes();
  Eigen::Matrix<double, kNodes, kNodes> vander;
  for (int k = 0; k < kNodes; ++k) {
    for (int p = 0; p < kNodes; ++p) vander(k, p) = std::pow(xi[k], p);
  }
  const Eigen::Matrix<double, kNodes, kNodes> inv = vander.inverse();

  pieces_.resize(static_cast<std::size_t>(4) * nx_ * ny_);
  Coeffs values;
  for (int py = 0; py < 2 * ny_; ++py) {
    for (int px = 0; px < 2 * nx_; ++px) {
      const double cx = 0.5 * px + 0.25;
      const double cy = 0.5 * py + 0.25;
      for (int k = 0; k < kNodes; ++k) {
        for (int l = 0; l < kNodes; ++l) {
          values(k, l) = surface.eval(cx + 0.25 * xi[k], cy + 0.25 * xi[l]);
        }
      }
      pieces_[static_cast<std::size_t>(py) * 2 * nx_ + px] = inv * values * inv.transpose();
    }
  }
}

double PolynomialSurface::eval(double x, double y) const {
  if (!(x >= 0.0 && x <= nx_ && y >= 0.0 && y <= ny_)) {
    throw Error(fmt::format("({}, {}) lies outside the surface domain", x, y));
  }
  const int px = std::min(static_cast<int>(std::floor(2.0 * x)), 2 * nx_ - 1);
  const int py = std::min(static_cast<int>(std::floor(2.0 * y)), 2 * ny_ - 1);
  const double u = 4.0 * (x - (0.5 * px + 0.25));
  const double v = 4.0 * (y - (0.5 * py + 0.25));
  const Coeffs& c = pieces_[static_cast<std::size_t>(py) * 2 * nx_ + px];
  // Horner in u for each power of v, then in v.
  double result = 0.0;
  for (int q = kDegree; q >= 0; --q) {
    double row = 0.0;
    for (int p = kDegree; p >= 0; --p) row = row * u + c(p, q);
    result = result * v + row;
  }
  return result;
}

}  // namespace groundsurf
