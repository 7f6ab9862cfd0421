// groundsurf: ground surface reconstruction from XYZ point clouds.
//
//   groundsurf synth --out data
//   groundsurf run --input data/cloud.xyz --method hrbf --basis bspline --out result
//
// Log verbosity comes from GROUNDSURF_LOG (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "groundsurf/cloud_io.hpp"
#include "groundsurf/pipeline.hpp"
#include "groundsurf/synthetic.hpp"

namespace gs = groundsurf;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("groundsurf");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("GROUNDSURF_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

void print_fit(const gs::FitSummary& s) {
  fmt::print("cells {} holes {} points {}\n", s.cells, s.holes, s.points);
  fmt::print("points per occupied cell: min {} mean {:.2f} max {}\n", s.min_points_per_cell,
             s.mean_points_per_cell, s.max_points_per_cell);
}

void print_fill(const gs::FillSummary& s) {
  if (s.method == gs::FillMethod::hierarchy) {
    fmt::print("filled {} holes (hierarchy, pyramid depth {})\n", s.holes_filled, s.pyramid_depth);
  } else {
    fmt::print("filled {} holes (hrbf, condition estimate {:.3e})\n", s.holes_filled,
               s.condition_estimate);
  }
}

void print_surface(const gs::SurfaceSummary& s) {
  fmt::print("surface sampled on {}x{} raster\n", s.samples_x, s.samples_y);
}

void print_detrend(const gs::DetrendSummary& s) {
  fmt::print("detrended {} points, residual std {:.9g}\n", s.points, s.residual_std);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Locally controlled, globally smooth ground surfaces from point clouds"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string input;
  std::vector<double> spacing;
  int min_points = gs::kDefaultMinPoints;
  std::string method = "hierarchy";
  std::string basis = "bspline";
  double c = 0.1;
  int poly_degree = 0;
  double exp_s = 1.0;
  double exp_a = 1.0;
  int samples = 4;
  std::string out = "out";
  bool detrend = false;

  auto* o_config = app.add_option("--config", config_path, "JSON config; flags override it")
                       ->check(CLI::ExistingFile);
  std::vector<std::pair<CLI::Option*, std::function<void(gs::PipelineConfig&)>>> overrides;
  auto bind = [&](CLI::Option* opt, std::function<void(gs::PipelineConfig&)> apply) {
    overrides.emplace_back(opt, std::move(apply));
    return opt;
  };
  bind(app.add_option("--input", input, "XYZ point cloud"),
       [&](auto& cfg) { cfg.input = input; });
  bind(app.add_option("--spacing", spacing, "grid spacing sx [sy] in survey units")
           ->expected(1, 2),
       [&](auto& cfg) {
         cfg.spacing = spacing.size() == 1 ? gs::Vec2(spacing[0], spacing[0])
                                           : gs::Vec2(spacing[0], spacing[1]);
       });
  bind(app.add_option("--min-points", min_points, "points needed for a non-hole cell"),
       [&](auto& cfg) { cfg.min_points = min_points; });
  bind(app.add_option("--method", method, "hole filling")
           ->check(CLI::IsMember({"hierarchy", "hrbf"})),
       [&](auto& cfg) { cfg.method = gs::parse_fill_method(method); });
  bind(app.add_option("--basis", basis, "partition of unity basis")
           ->check(CLI::IsMember({"bspline", "exp"})),
       [&](auto& cfg) { cfg.basis.kind = gs::parse_basis(basis); });
  bind(app.add_option("--c", c, "multiquadric shape parameter (grid units)"),
       [&](auto& cfg) { cfg.hrbf.c = c; });
  bind(app.add_option("--poly-degree", poly_degree, "HRBF polynomial degree (0 or 1)"),
       [&](auto& cfg) { cfg.hrbf.poly_degree = poly_degree; });
  bind(app.add_option("--exp-s", exp_s, "exponential basis smoothing parameter"),
       [&](auto& cfg) { cfg.basis.exp_s = exp_s; });
  bind(app.add_option("--exp-a", exp_a, "exponential basis support (grid units)"),
       [&](auto& cfg) { cfg.basis.exp_a = exp_a; });
  bind(app.add_option("--samples", samples, "raster samples per grid cell and axis"),
       [&](auto& cfg) { cfg.samples_per_cell = samples; });
  bind(app.add_option("--out", out, "output directory"), [&](auto& cfg) { cfg.out_dir = out; });
  bind(app.add_flag("--detrend", detrend, "run: also detrend the input cloud"),
       [&](auto& cfg) { cfg.detrend = detrend; });

  auto* fit = app.add_subcommand("fit", "fit level-0 slopes");
  auto* fill = app.add_subcommand("fill", "fill holes in fitted slopes");
  auto* surface = app.add_subcommand("surface", "blend filled slopes and export raster + mesh");
  auto* detrend_cmd = app.add_subcommand("detrend", "subtract the ground surface from the input");
  auto* run = app.add_subcommand("run", "fit, fill, surface [, detrend]");
  auto* synth = app.add_subcommand("synth", "write the synthetic test terrain");

  gs::SyntheticTerrain terrain;
  synth->add_option("--points", terrain.points, "number of points");
  synth->add_option("--seed", terrain.seed, "random seed");
  synth->add_option("--noise", terrain.noise, "height noise standard deviation");

  CLI11_PARSE(app, argc, argv);

  try {
    gs::PipelineConfig cfg;
    if (o_config->count() > 0) cfg = gs::load_config(config_path);
    for (auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply(cfg);
    }
    cfg.validate();

    if (synth->parsed()) {
      std::filesystem::create_directories(cfg.out_dir);
      const auto path = cfg.out_dir / gs::files::kSynthetic;
      gs::save_xyz(terrain.generate(), path);
      fmt::print("wrote {} points to {}\n", terrain.points, path.string());
      return 0;
    }
    if (cfg.input.empty() && (fit->parsed() || detrend_cmd->parsed() || run->parsed())) {
      throw gs::Error("--input is required");
    }
    gs::write_effective_config(cfg);
    if (fit->parsed()) print_fit(gs::cmd_fit(cfg));
    if (fill->parsed()) print_fill(gs::cmd_fill(cfg));
    if (surface->parsed()) print_surface(gs::cmd_surface(cfg));
    if (detrend_cmd->parsed()) print_detrend(gs::cmd_detrend(cfg));
    if (run->parsed()) {
      const auto r = gs::cmd_run(cfg);
      print_fit(r.fit);
      print_fill(r.fill);
      print_surface(r.surface);
      if (cfg.detrend) print_detrend(r.detrend);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
