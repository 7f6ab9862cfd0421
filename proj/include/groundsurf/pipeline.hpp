#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "groundsurf/grid_model.hpp"
#include "groundsurf/hrbf.hpp"
#include "groundsurf/point_cloud.hpp"
#include "groundsurf/pu_surface.hpp"

namespace groundsurf {

enum class FillMethod { hierarchy, hrbf };

struct PipelineConfig {
  std::filesystem::path input;
  Vec2 spacing{1.0, 1.0};
  int min_points = kDefaultMinPoints;
  double nz_min = kDefaultNzMin;
  FillMethod method = FillMethod::hierarchy;
  BasisParams basis;
  HRBFConfig hrbf;
  /// Raster samples per grid cell along each axis.
  int samples_per_cell = 4;
  std::filesystem::path out_dir = "out";
  bool detrend = false;

  void validate() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

std::string to_string(FillMethod m);
std::string to_string(Basis b);
FillMethod parse_fill_method(const std::string& s);
Basis parse_basis(const std::string& s);

/// Grid description shared by every stage (grid.json in the output directory).
struct GridInfo {
  GridTransform transform;
  int min_points = kDefaultMinPoints;
};

void save_grid_info(const GridInfo& info, const std::filesystem::path& path);
GridInfo load_grid_info(const std::filesystem::path& path);

/// Output file names inside PipelineConfig::out_dir.
namespace files {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kGrid = "grid.json";
inline constexpr const char* kSlopes = "slopes.csv";
inline constexpr const char* kFilled = "filled.csv";
inline constexpr const char* kGround = "ground.csv";
inline constexpr const char* kRaster = "surface.xyz";
inline constexpr const char* kMesh = "surface.obj";
inline constexpr const char* kResiduals = "residuals.xyz";
inline constexpr const char* kSynthetic = "cloud.xyz";
}  // namespace files

struct FitSummary {
  int cells = 0;
  int holes = 0;
  long points = 0;
  long min_points_per_cell = 0;
  long max_points_per_cell = 0;
  double mean_points_per_cell = 0.0;
};

struct FillSummary {
  FillMethod method = FillMethod::hierarchy;
  int holes_filled = 0;
  std::size_t pyramid_depth = 0;
  double condition_estimate = 0.0;
};

struct SurfaceSummary {
  int samples_x = 0;
  int samples_y = 0;
};

struct DetrendSummary {
  long points = 0;
  double residual_std = 0.0;
};

FitSummary cmd_fit(const PipelineConfig& cfg);
FillSummary cmd_fill(const PipelineConfig& cfg);
SurfaceSummary cmd_surface(const PipelineConfig& cfg);
DetrendSummary cmd_detrend(const PipelineConfig& cfg);

struct RunSummary {
  FitSummary fit;
  FillSummary fill;
  SurfaceSummary surface;
  DetrendSummary detrend;
};

RunSummary cmd_run(const PipelineConfig& cfg);

/// Writes the effective configuration next to the outputs.
void write_effective_config(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

/// Fill holes of a level-0 grid with the configured method.
SlopeGrid fill_holes(const SlopeGrid& grid, const PipelineConfig& cfg, FillSummary* summary = nullptr);

/// Final smoothing pass and blending of a filled grid.
GroundSurface build_surface(const SlopeGrid& filled, const BasisParams& basis);

/// Population standard deviation of the z column.
double residual_std(const PointCloud& cloud);

}  // namespace groundsurf
