#pragma once

#include <filesystem>
#include <string>

#include "groundsurf/grid_model.hpp"
#include "groundsurf/point_cloud.hpp"
#include "groundsurf/pu_surface.hpp"

namespace groundsurf {

/// Whitespace-separated "x y z [ignored...]" per line; '#' starts a comment line.
PointCloud load_xyz(const std::filesystem::path& path);
void save_xyz(const PointCloud& cloud, const std::filesystem::path& path);

/// Replaces each z with z - g(x, y). The cloud must be in scaled grid units.
PointCloud detrend(const PointCloud& scaled, const GroundSurface& surface);

/// Rows "i,j,cx,cy,cz,nx,ny,nz"; holes omitted.
void export_slopes_csv(const SlopeGrid& grid, const std::filesystem::path& path);
/// Inverse of export_slopes_csv for a level-0 grid of the given size.
SlopeGrid load_slopes_csv(const std::filesystem::path& path, int nx, int ny,
                          int min_points = kDefaultMinPoints);

/// "x y z" rows in raster order.
void export_raster(const Raster& raster, const std::filesystem::path& path);
/// One vertex per sample, each raster quad split into two triangles.
void export_obj_mesh(const Raster& raster, const std::filesystem::path& path);

/// 17 significant digits; lossless for doubles.
std::string format_number(double v);

}  // namespace groundsurf
