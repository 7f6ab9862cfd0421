#include "groundsurf/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "groundsurf/cloud_io.hpp"

namespace groundsurf {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

// Runs a stage, prefixing failures with the stage name and logging its duration.
template <typename F>
auto staged(const char* stage, F&& body) {
  const auto start = Clock::now();
  try {
    auto result = body();
    const std::chrono::duration<double> dt = Clock::now() - start;
    spdlog::info("{}: done in {:.3f} s", stage, dt.count());
    return result;
  } catch (const std::exception& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

fs::path out_file(const PipelineConfig& cfg, const char* name) { return cfg.out_dir / name; }

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw Error(std::string("missing ") + what + " file " + p.string());
}

SlopeGrid load_stage_grid(const PipelineConfig& cfg, const char* name, const char* what,
                          GridInfo* info_out = nullptr) {
  const fs::path grid_path = out_file(cfg, files::kGrid);
  const fs::path slopes_path = out_file(cfg, name);
  require_file(grid_path, "grid");
  require_file(slopes_path, what);
  const GridInfo info = load_grid_info(grid_path);
  if (info_out) *info_out = info;
  return load_slopes_csv(slopes_path, info.transform.nx, info.transform.ny, info.min_points);
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(spacing.x() > 0.0) || !(spacing.y() > 0.0)) throw Error("spacing must be positive");
  if (min_points < 3) throw Error("min_points must be at least 3");
  if (!(nz_min > 0.0) || nz_min > 1.0) throw Error("nz_min must be in (0, 1]");
  if (samples_per_cell < 1) throw Error("samples per cell must be at least 1");
  hrbf.validate();
  if (!(basis.exp_s > 0.0) || !(basis.exp_a > 0.0) || basis.exp_a > 1.5) {
    throw Error("exponential basis needs s > 0 and 0 < a <= 1.5");
  }
}

std::string to_string(FillMethod m) { return m == FillMethod::hierarchy ? "hierarchy" : "hrbf"; }
std::string to_string(Basis b) { return b == Basis::bspline ? "bspline" : "exp"; }

FillMethod parse_fill_method(const std::string& s) {
  if (s == "hierarchy") return FillMethod::hierarchy;
  if (s == "hrbf") return FillMethod::hrbf;
  throw Error("unknown hole-fill method '" + s + "'");
}

Basis parse_basis(const std::string& s) {
  if (s == "bspline") return Basis::bspline;
  if (s == "exp" || s == "exponential") return Basis::exponential;
  throw Error("unknown basis '" + s + "'");
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = nlohmann::json{{"input", c.input.string()},
                     {"spacing", {c.spacing.x(), c.spacing.y()}},
                     {"min_points", c.min_points},
                     {"nz_min", c.nz_min},
                     {"method", to_string(c.method)},
                     {"basis", to_string(c.basis.kind)},
                     {"exp_s", c.basis.exp_s},
                     {"exp_a", c.basis.exp_a},
                     {"c", c.hrbf.c},
                     {"poly_degree", c.hrbf.poly_degree},
                     {"samples", c.samples_per_cell},
                     {"out", c.out_dir.string()},
                     {"detrend", c.detrend}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  PipelineConfig d;
  c.input = j.value("input", d.input.string());
  if (j.contains("spacing")) {
    const auto s = j.at("spacing").get<std::vector<double>>();
    if (s.size() == 1) c.spacing = Vec2(s[0], s[0]);
    else if (s.size() == 2) c.spacing = Vec2(s[0], s[1]);
    else throw Error("spacing needs one or two values");
  }
  c.min_points = j.value("min_points", d.min_points);
  c.nz_min = j.value("nz_min", d.nz_min);
  c.method = parse_fill_method(j.value("method", to_string(d.method)));
  c.basis.kind = parse_basis(j.value("basis", to_string(d.basis.kind)));
  c.basis.exp_s = j.value("exp_s", d.basis.exp_s);
  c.basis.exp_a = j.value("exp_a", d.basis.exp_a);
  c.hrbf.c = j.value("c", d.hrbf.c);
  c.hrbf.poly_degree = j.value("poly_degree", d.hrbf.poly_degree);
  c.samples_per_cell = j.value("samples", d.samples_per_cell);
  c.out_dir = j.value("out", d.out_dir.string());
  c.detrend = j.value("detrend", d.detrend);
}

void save_grid_info(const GridInfo& info, const fs::path& path) {
  const nlohmann::json j{{"origin", {info.transform.origin.x(), info.transform.origin.y()}},
                         {"spacing", {info.transform.spacing.x(), info.transform.spacing.y()}},
                         {"nx", info.transform.nx},
                         {"ny", info.transform.ny},
                         {"min_points", info.min_points}};
  std::ofstream out(path);
  if (!(out << j.dump(2) << '\n')) throw Error("cannot write " + path.string());
}

GridInfo load_grid_info(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    GridInfo info;
    const auto o = j.at("origin").get<std::vector<double>>();
    const auto s = j.at("spacing").get<std::vector<double>>();
    if (o.size() != 2 || s.size() != 2) throw Error("origin and spacing need two values");
    info.transform.origin = Vec2(o[0], o[1]);
    info.transform.spacing = Vec2(s[0], s[1]);
    info.transform.nx = j.at("nx").get<int>();
    info.transform.ny = j.at("ny").get<int>();
    info.min_points = j.value("min_points", kDefaultMinPoints);
    return info;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed grid file " + path.string() + ": " + e.what());
  }
}

void write_effective_config(const PipelineConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const fs::path path = out_file(cfg, files::kConfig);
  std::ofstream out(path);
  if (!(out << nlohmann::json(cfg).dump(2) << '\n')) throw Error("cannot write " + path.string());
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  try {
    return nlohmann::json::parse(in).get<PipelineConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed config " + path.string() + ": " + e.what());
  }
}

SlopeGrid fill_holes(const SlopeGrid& grid, const PipelineConfig& cfg, FillSummary* summary) {
  FillSummary s;
  s.method = cfg.method;
  s.holes_filled = grid.hole_count();
  SlopeGrid filled;
  if (cfg.method == FillMethod::hierarchy) {
    const SlopePyramid pyramid = build_pyramid(grid, cfg.nz_min);
    s.pyramid_depth = pyramid.depth();
    filled = fill_holes_hierarchical(pyramid);
  } else {
    HRBFModel model;
    filled = fill_holes_hrbf(grid, cfg.hrbf, &model);
    s.condition_estimate = model.condition_estimate;
  }
  if (summary) *summary = s;
  return filled;
}

GroundSurface build_surface(const SlopeGrid& filled, const BasisParams& basis) {
  return GroundSurface(kernel_smooth(filled), basis);
}

double residual_std(const PointCloud& cloud) {
  if (cloud.empty()) return 0.0;
  const auto z = cloud.xyz.row(2).array();
  const double mean = z.mean();
  return std::sqrt((z - mean).square().mean());
}

FitSummary cmd_fit(const PipelineConfig& cfg) {
  return staged("fit", [&] {
    cfg.validate();
    const PointCloud cloud = load_xyz(cfg.input);
    const GridTransform t = make_transform(cloud, cfg.spacing);
    const PointCloud scaled = to_grid_coords(cloud, t);
    const auto cells = bin_points(scaled, t.nx, t.ny);
    const SlopeGrid grid = fit_grid(scaled, t.nx, t.ny, FitOptions{cfg.min_points, cfg.nz_min});

    FitSummary s;
    s.cells = t.nx * t.ny;
    s.holes = grid.hole_count();
    s.points = cloud.size();
    long occupied = 0;
    s.min_points_per_cell = cloud.size();
    for (const auto& c : cells) {
      if (c.count() == 0) continue;
      ++occupied;
      s.min_points_per_cell = std::min(s.min_points_per_cell, c.count());
      s.max_points_per_cell = std::max(s.max_points_per_cell, c.count());
    }
    s.mean_points_per_cell = static_cast<double>(s.points) / static_cast<double>(occupied);

    fs::create_directories(cfg.out_dir);
    save_grid_info(GridInfo{t, cfg.min_points}, out_file(cfg, files::kGrid));
    export_slopes_csv(grid, out_file(cfg, files::kSlopes));
    spdlog::info("fit: {}x{} grid, {} holes", t.nx, t.ny, s.holes);
    return s;
  });
}

FillSummary cmd_fill(const PipelineConfig& cfg) {
  return staged("fill", [&] {
    cfg.validate();
    const SlopeGrid grid = load_stage_grid(cfg, files::kSlopes, "slopes");
    if (grid.slope_count() == 0) throw Error("no ground data");
    FillSummary s;
    const SlopeGrid filled = fill_holes(grid, cfg, &s);
    export_slopes_csv(filled, out_file(cfg, files::kFilled));
    if (cfg.method == FillMethod::hierarchy) {
      spdlog::info("fill: hierarchy filled {} holes, pyramid depth {}", s.holes_filled,
                   s.pyramid_depth);
    } else {
      spdlog::info("fill: hrbf filled {} holes, condition estimate {:.3e}", s.holes_filled,
                   s.condition_estimate);
    }
    return s;
  });
}

SurfaceSummary cmd_surface(const PipelineConfig& cfg) {
  return staged("surface", [&] {
    cfg.validate();
    GridInfo info;
    const SlopeGrid filled = load_stage_grid(cfg, files::kFilled, "filled slopes", &info);
    if (filled.hole_count() != 0) throw Error("filled slopes still contain holes");
    const GroundSurface surface = build_surface(filled, cfg.basis);
    export_slopes_csv(surface.grid(), out_file(cfg, files::kGround));

    SurfaceSummary s;
    s.samples_x = cfg.samples_per_cell * info.transform.nx + 1;
    s.samples_y = cfg.samples_per_cell * info.transform.ny + 1;
    Raster raster = sample_surface(surface, s.samples_x, s.samples_y);
    // Export in survey units.
    raster.xyz.topRows<2>() =
        (raster.xyz.topRows<2>().array().colwise() * info.transform.spacing.array()).matrix().colwise() +
        info.transform.origin;
    export_raster(raster, out_file(cfg, files::kRaster));
    export_obj_mesh(raster, out_file(cfg, files::kMesh));
    return s;
  });
}

DetrendSummary cmd_detrend(const PipelineConfig& cfg) {
  return staged("detrend", [&] {
    cfg.validate();
    GridInfo info;
    const SlopeGrid ground = load_stage_grid(cfg, files::kGround, "surface", &info);
    const GroundSurface surface(ground, cfg.basis);
    const PointCloud cloud = load_xyz(cfg.input);
    const PointCloud residuals = detrend(to_grid_coords(cloud, info.transform), surface);
    save_xyz(from_grid_coords(residuals, info.transform), out_file(cfg, files::kResiduals));
    DetrendSummary s{residuals.size(), residual_std(residuals)};
    spdlog::info("detrend: residual std {:.6g}", s.residual_std);
    return s;
  });
}

RunSummary cmd_run(const PipelineConfig& cfg) {
  RunSummary r;
  r.fit = cmd_fit(cfg);
  r.fill = cmd_fill(cfg);
  r.surface = cmd_surface(cfg);
  if (cfg.detrend) r.detrend = cmd_detrend(cfg);
  return r;
}

}  // namespace groundsurf
