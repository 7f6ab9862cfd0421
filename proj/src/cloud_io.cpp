#include "groundsurf/cloud_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <fmt/os.h>

namespace groundsurf {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

bool parse_double(std::string_view tok, double& v) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  return ec == std::errc() && ptr == end && std::isfinite(v);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  if (sep == ' ') {
    std::size_t k = 0;
    while (k < line.size()) {
      while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
      std::size_t e = k;
      while (e < line.size() && !std::isspace(static_cast<unsigned char>(line[e]))) ++e;
      if (e > k) out.push_back(line.substr(k, e - k));
      k = e;
    }
  } else {
    std::size_t k = 0;
    for (;;) {
      const std::size_t e = line.find(sep, k);
      out.push_back(line.substr(k, e == std::string_view::npos ? std::string_view::npos : e - k));
      if (e == std::string_view::npos) break;
      k = e + 1;
    }
  }
  return out;
}

bool blank(std::string_view line) {
  for (char ch : line) {
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  return fmt::format("{:.17g}", v);
}

PointCloud load_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());

  std::vector<double> coords;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (blank(view)) continue;
    const auto first = view.find_first_not_of(" \t\r");
    if (view[first] == '#') continue;
    const auto fields = split(view, ' ');
    if (fields.size() < 3) {
      throw Error(fmt::format("{}:{}: expected at least 3 fields, got {}", path.string(), lineno,
                              fields.size()));
    }
    for (int k = 0; k < 3; ++k) {
      double v = 0.0;
      if (!parse_double(fields[k], v)) {
        throw Error(fmt::format("{}:{}: malformed number '{}'", path.string(), lineno, fields[k]));
      }
      coords.push_back(v);
    }
  }
  if (coords.empty()) throw Error("no ground data: " + path.string() + " contains no points");
  return PointCloud(Eigen::Map<const Eigen::Matrix3Xd>(coords.data(), 3,
                                                       static_cast<Eigen::Index>(coords.size() / 3)));
}

void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (Eigen::Index k = 0; k < cloud.size(); ++k) {
    const auto p = cloud.point(k);
    out << format_number(p.x()) << ' ' << format_number(p.y()) << ' ' << format_number(p.z())
        << '\n';
  }
  finish(out, path);
}

PointCloud detrend(const PointCloud& scaled, const GroundSurface& surface) {
  PointCloud out = scaled;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    out.xyz(2, k) -= surface.eval(out.xyz(0, k), out.xyz(1, k));
  }
  return out;
}

void export_slopes_csv(const SlopeGrid& grid, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const auto& s = grid.at(i, j);
      if (!s) continue;
      out << i << ',' << j;
      for (int k = 0; k < 3; ++k) out << ',' << format_number(s->centroid[k]);
      for (int k = 0; k < 3; ++k) out << ',' << format_number(s->normal[k]);
      out << '\n';
    }
  }
  finish(out, path);
}

SlopeGrid load_slopes_csv(const std::filesystem::path& path, int nx, int ny, int min_points) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  SlopeGrid grid(nx, ny, 0, min_points);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line) || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 8) {
      throw Error(fmt::format("{}:{}: expected 8 fields", path.string(), lineno));
    }
    int ij[2];
    for (int k = 0; k < 2; ++k) {
      auto [ptr, ec] = std::from_chars(fields[k].data(), fields[k].data() + fields[k].size(), ij[k]);
      if (ec != std::errc() || ptr != fields[k].data() + fields[k].size()) {
        throw Error(fmt::format("{}:{}: malformed cell index", path.string(), lineno));
      }
    }
    if (!grid.in_range(ij[0], ij[1])) {
      throw Error(fmt::format("{}:{}: cell ({}, {}) outside {}x{} grid", path.string(), lineno,
                              ij[0], ij[1], nx, ny));
    }
    double v[6];
    for (int k = 0; k < 6; ++k) {
      if (!parse_double(fields[k + 2], v[k])) {
        throw Error(fmt::format("{}:{}: malformed number", path.string(), lineno));
      }
    }
    grid.at(ij[0], ij[1]) = Slope{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
  }
  return grid;
}

void export_raster(const Raster& raster, const std::filesystem::path& path) {
  if (raster.xyz.cols() == 0) throw Error("empty raster");
  auto out = open_for_write(path);
  for (Eigen::Index k = 0; k < raster.xyz.cols(); ++k) {
    out << format_number(raster.xyz(0, k)) << ' ' << format_number(raster.xyz(1, k)) << ' '
        << format_number(raster.xyz(2, k)) << '\n';
  }
  finish(out, path);
}

void export_obj_mesh(const Raster& raster, const std::filesystem::path& path) {
  if (raster.nx < 2 || raster.ny < 2 ||
      raster.xyz.cols() != static_cast<Eigen::Index>(raster.nx) * raster.ny) {
    throw Error("mesh export needs at least 2x2 samples");
  }
  auto out = open_for_write(path);
  for (Eigen::Index k = 0; k < raster.xyz.cols(); ++k) {
    out << "v " << format_number(raster.xyz(0, k)) << ' ' << format_number(raster.xyz(1, k)) << ' '
        << format_number(raster.xyz(2, k)) << '\n';
  }
  // OBJ indices are 1-based.
  auto vid = [&](int i, int j) { return static_cast<long>(j) * raster.nx + i + 1; };
  for (int j = 0; j + 1 < raster.ny; ++j) {
    for (int i = 0; i + 1 < raster.nx; ++i) {
      out << "f " << vid(i, j) << ' ' << vid(i + 1, j) << ' ' << vid(i + 1, j + 1) << '\n';
      out << "f " << vid(i, j) << ' ' << vid(i + 1, j + 1) << ' ' << vid(i, j + 1) << '\n';
    }
  }
  finish(out, path);
}

}  // namespace groundsurf
