#include "groundsurf/grid_model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace groundsurf {
namespace {

Mat3 moments_to_matrix(const Eigen::Matrix<double, 6, 1>& m) {
  Mat3 s;
  s << m[0], m[3], m[4],
       m[3], m[1], m[5],
       m[4], m[5], m[2];
  return s;
}

Eigen::Matrix<double, 6, 1> matrix_to_moments(const Mat3& s) {
  Eigen::Matrix<double, 6, 1> m;
  m << s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(0, 2), s(1, 2);
  return m;
}

// Unit normal of the total least squares plane for a centered covariance.
// Repeated smallest eigenvalues are resolved toward the z axis.
std::optional<Vec3> smallest_direction(const Mat3& cov, double nz_min) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  if (es.info() != Eigen::Success) return std::nullopt;
  const Vec3 lambda = es.eigenvalues();
  const Mat3 vectors = es.eigenvectors();
  const double tol = 1e-10 * std::max(std::abs(lambda[2]), 1e-300);

  Vec3 normal = vectors.col(0);
  if (lambda[1] - lambda[0] <= tol) {
    const int dim = (lambda[2] - lambda[0] <= tol) ? 3 : 2;
    Vec3 w = Vec3::Zero();
    for (int k = 0; k < dim; ++k) w += vectors(2, k) * vectors.col(k);
    if (w.norm() > 0.0) normal = w.normalized();
  }
  if (normal.z() < 0.0) normal = -normal;
  if (!(normal.z() >= nz_min)) return std::nullopt;
  return normal;
}

}  // namespace

void CellAccumulator::add(const Vec3& p) {
  const Vec3 q = p - anchor_;
  ++count_;
  sum_ += q;
  moments_[0] += q.x() * q.x();
  moments_[1] += q.y() * q.y();
  moments_[2] += q.z() * q.z();
  moments_[3] += q.x() * q.y();
  moments_[4] += q.x() * q.z();
  moments_[5] += q.y() * q.z();
}

void CellAccumulator::merge(const CellAccumulator& other) {
  if (other.count_ == 0) return;
  // Re-express the other moments about this anchor.
  const Vec3 delta = other.anchor_ - anchor_;
  const double n = static_cast<double>(other.count_);
  const Mat3 s2 = moments_to_matrix(other.moments_) + other.sum_ * delta.transpose() +
                  delta * other.sum_.transpose() + n * delta * delta.transpose();
  count_ += other.count_;
  sum_ += other.sum_ + n * delta;
  moments_ += matrix_to_moments(s2);
}

Vec3 CellAccumulator::mean() const {
  return anchor_ + sum_ / static_cast<double>(std::max<long>(count_, 1));
}

Mat3 CellAccumulator::covariance() const {
  if (count_ == 0) return Mat3::Zero();
  const double n = static_cast<double>(count_);
  const Vec3 m = sum_ / n;
  return moments_to_matrix(moments_) / n - m * m.transpose();
}

std::optional<Slope> fit_plane_total_lsqr(const CellAccumulator& acc, const FitOptions& opts) {
  if (acc.count() < 3 || acc.count() < opts.min_points) return std::nullopt;
  const auto normal = smallest_direction(acc.covariance(), opts.nz_min);
  if (!normal) return std::nullopt;
  return Slope{acc.mean(), *normal};
}

std::optional<Slope> fit_plane_total_lsqr(const Eigen::Ref<const Eigen::Matrix3Xd>& points,
                                          const FitOptions& opts) {
  const Eigen::Index n = points.cols();
  if (n < 3 || n < opts.min_points) return std::nullopt;
  const Vec3 mean = points.rowwise().mean();
  const Eigen::Matrix3Xd centered = points.colwise() - mean;
  const Mat3 cov = centered * centered.transpose() / static_cast<double>(n);
  const auto normal = smallest_direction(cov, opts.nz_min);
  if (!normal) return std::nullopt;
  return Slope{mean, *normal};
}

SlopeGrid::SlopeGrid(int nx, int ny, int level, int min_points)
    : nx_(nx), ny_(ny), level_(level), min_points_(min_points) {
  if (nx <= 0 || ny <= 0) throw Error("grid dimensions must be positive");
  if (level < 0 || level > 30) throw Error("invalid grid level");
  cells_.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
}

int SlopeGrid::hole_count() const {
  return static_cast<int>(std::count_if(cells_.begin(), cells_.end(),
                                        [](const auto& c) { return !c.has_value(); }));
}

Eigen::AlignedBox2d SlopeGrid::footprint(int i, int j) const {
  const double h = cell_size();
  return Eigen::AlignedBox2d(Vec2(i * h, j * h), Vec2((i + 1) * h, (j + 1) * h));
}

std::vector<CellAccumulator> bin_points(const PointCloud& scaled, int nx, int ny) {
  if (nx <= 0 || ny <= 0) throw Error("grid dimensions must be positive");
  std::vector<CellAccumulator> cells(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (Eigen::Index k = 0; k < scaled.size(); ++k) {
    const Vec3 p = scaled.point(k);
    if (!(p.x() >= 0.0 && p.x() <= nx && p.y() >= 0.0 && p.y() <= ny)) {
      throw Error(fmt::format("point {} at ({}, {}) lies outside the {}x{} grid", k, p.x(), p.y(),
                              nx, ny));
    }
    const int i = std::min(static_cast<int>(std::floor(p.x())), nx - 1);
    const int j = std::min(static_cast<int>(std::floor(p.y())), ny - 1);
    auto& acc = cells[static_cast<std::size_t>(j) * nx + i];
    if (acc.count() == 0) acc = CellAccumulator(Vec3(i, j, p.z()));
    acc.add(p);
  }
  return cells;
}

SlopeGrid fit_grid(const PointCloud& scaled, int nx, int ny, const FitOptions& opts) {
  const auto cells = bin_points(scaled, nx, ny);
  SlopeGrid grid(nx, ny, 0, opts.min_points);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      grid.at(i, j) = fit_plane_total_lsqr(cells[grid.index(i, j)], opts);
    }
  }
  if (grid.slope_count() == 0) throw Error("no ground data: every grid cell is a hole");
  return grid;
}

Eigen::Matrix<double, 3, 4> slope_vertices(const Slope& s, const Eigen::AlignedBox2d& footprint) {
  using Box = Eigen::AlignedBox2d;
  const Box::CornerType corners[4] = {Box::BottomLeft, Box::BottomRight, Box::TopRight,
                                      Box::TopLeft};
  Eigen::Matrix<double, 3, 4> v;
  for (int k = 0; k < 4; ++k) {
    const Vec2 c = footprint.corner(corners[k]);
    v.col(k) << c, s.height(c);
  }
  return v;
}

SlopeGrid coarsen(const SlopeGrid& grid, double nz_min) {
  const int cnx = (grid.nx() + 1) / 2;
  const int cny = (grid.ny() + 1) / 2;
  SlopeGrid coarse(cnx, cny, grid.level() + 1, grid.min_points());
  const FitOptions opts{3, nz_min};
  Eigen::Matrix<double, 3, 16> verts;
  for (int cj = 0; cj < cny; ++cj) {
    for (int ci = 0; ci < cnx; ++ci) {
      int used = 0;
      for (int b = 0; b < 2; ++b) {
        for (int a = 0; a < 2; ++a) {
          const int i = 2 * ci + a;
          const int j = 2 * cj + b;
          if (!grid.in_range(i, j) || grid.is_hole(i, j)) continue;
          verts.middleCols<4>(4 * used) = slope_vertices(*grid.at(i, j), grid.footprint(i, j));
          ++used;
        }
      }
      if (used > 0) coarse.at(ci, cj) = fit_plane_total_lsqr(verts.leftCols(4 * used), opts);
    }
  }
  return coarse;
}

SlopePyramid build_pyramid(const SlopeGrid& grid, double nz_min) {
  if (grid.slope_count() == 0) throw Error("cannot build a pyramid without slopes");
  SlopePyramid pyramid;
  pyramid.levels.push_back(grid);
  while (pyramid.top().hole_count() > 0) {
    if (pyramid.top().nx() == 1 && pyramid.top().ny() == 1) {
      throw Error("pyramid top is a hole: coarse refit too steep");
    }
    pyramid.levels.push_back(coarsen(pyramid.top(), nz_min));
  }
  return pyramid;
}

SlopeGrid kernel_smooth(const SlopeGrid& grid) {
  SlopeGrid out(grid.nx(), grid.ny(), grid.level(), grid.min_points());
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (grid.is_hole(i, j)) continue;
      Vec3 centroid = Vec3::Zero();
      Vec3 normal = Vec3::Zero();
      int n = 0;
      for (int b = -1; b <= 1; ++b) {
        for (int a = -1; a <= 1; ++a) {
          if (!grid.in_range(i + a, j + b) || grid.is_hole(i + a, j + b)) continue;
          const Slope& s = *grid.at(i + a, j + b);
          centroid += s.centroid;
          normal += s.normal;
          ++n;
        }
      }
      out.at(i, j) = Slope{centroid / n, normal.normalized()};
    }
  }
  return out;
}

SlopeGrid project_into_holes(const SlopeGrid& fine, const SlopeGrid& parent) {
  if (parent.level() != fine.level() + 1 || parent.nx() != (fine.nx() + 1) / 2 ||
      parent.ny() != (fine.ny() + 1) / 2) {
    throw Error("parent grid is not the next coarser level");
  }
  SlopeGrid out = fine;
  for (int j = 0; j < fine.ny(); ++j) {
    for (int i = 0; i < fine.nx(); ++i) {
      if (!fine.is_hole(i, j)) continue;
      const auto& p = parent.at(i / 2, j / 2);
      if (!p) throw Error("parent cell is a hole");
      const Vec2 c = fine.cell_center(i, j);
      out.at(i, j) = Slope{Vec3(c.x(), c.y(), p->height(c)), p->normal};
    }
  }
  return out;
}

SlopeGrid fill_holes_hierarchical(const SlopePyramid& pyramid) {
  if (pyramid.levels.empty()) throw Error("empty pyramid");
  if (pyramid.top().hole_count() > 0) throw Error("pyramid top level has holes");
  SlopeGrid current = kernel_smooth(pyramid.top());
  for (auto level = pyramid.levels.rbegin() + 1; level != pyramid.levels.rend(); ++level) {
    current = kernel_smooth(project_into_holes(*level, current));
  }
  return current;
}

}  // namespace groundsurf
