#include "roomtherm/pointcloud.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include "roomtherm/error.hpp"

namespace roomtherm {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

Point3 parse_point(const std::vector<std::string_view>& tokens, const std::array<std::size_t, 3>& columns,
                   const std::string& path, std::size_t line_no) {
  Point3 p;
  for (int k = 0; k < 3; ++k) {
    const auto col = columns[k];
    if (col >= tokens.size()) {
      throw ParseError(path, line_no, "expected at least " + std::to_string(col + 1) + " values");
    }
    if (!parse_double(tokens[col], p[k])) {
      throw ParseError(path, line_no, "non-numeric coordinate '" + std::string(tokens[col]) + "'");
    }
    if (!std::isfinite(p[k])) throw ParseError(path, line_no, "non-finite coordinate");
  }
  return p;
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<std::string> properties;
};

PointCloud load_ply(std::istream& in, const std::string& path) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };

  if (!next_line() || trim(line) != "ply") throw ParseError(path, 1, "missing 'ply' magic");

  std::vector<PlyElement> elements;
  bool have_format = false;
  bool ended = false;
  while (next_line()) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const auto key = tokens[0];
    if (key == "format") {
      if (tokens.size() < 2) throw ParseError(path, line_no, "malformed format line");
      if (tokens[1] != "ascii") {
        throw ParseError(path, line_no, "unsupported PLY format '" + std::string(tokens[1]) + "' (ASCII only)");
      }
      have_format = true;
    } else if (key == "comment" || key == "obj_info") {
      continue;
    } else if (key == "element") {
      std::size_t count = 0;
      if (tokens.size() != 3 ||
          std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), count).ec != std::errc()) {
        throw ParseError(path, line_no, "malformed element line");
      }
      elements.push_back({std::string(tokens[1]), count, {}});
    } else if (key == "property") {
      if (elements.empty()) throw ParseError(path, line_no, "property before any element");
      if (tokens.size() < 3) throw ParseError(path, line_no, "malformed property line");
      elements.back().properties.emplace_back(tokens.back());
    } else if (key == "end_header") {
      ended = true;
      break;
    } else {
      throw ParseError(path, line_no, "unknown header keyword '" + std::string(key) + "'");
    }
  }
  if (!have_format) throw ParseError(path, line_no, "missing format line");
  if (!ended) throw ParseError(path, line_no, "missing end_header");

  const auto vertex_it =
      std::find_if(elements.begin(), elements.end(), [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) throw ParseError(path, line_no, "no vertex element");

  std::array<std::size_t, 3> columns{};
  const char* names[3] = {"x", "y", "z"};
  for (int k = 0; k < 3; ++k) {
    const auto& props = vertex_it->properties;
    const auto it = std::find(props.begin(), props.end(), names[k]);
    if (it == props.end()) throw ParseError(path, line_no, std::string("vertex has no property ") + names[k]);
    columns[k] = static_cast<std::size_t>(it - props.begin());
  }

  auto next_data_line = [&]() -> bool {
    while (next_line()) {
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  // Elements declared before the vertex block are skipped row by row.
  for (auto it = elements.begin(); it != vertex_it; ++it) {
    for (std::size_t i = 0; i < it->count; ++i) {
      if (!next_data_line()) throw ParseError(path, line_no + 1, "unexpected end of file in element " + it->name);
    }
  }

  PointCloud cloud;
  cloud.points.reserve(vertex_it->count);
  for (std::size_t i = 0; i < vertex_it->count; ++i) {
    if (!next_data_line()) {
      throw ParseError(path, line_no + 1,
                       "vertex count mismatch: header declares " + std::to_string(vertex_it->count) + ", found " +
                           std::to_string(i));
    }
    cloud.points.push_back(parse_point(split_ws(line), columns, path, line_no));
  }
  if (std::next(vertex_it) == elements.end() && next_data_line()) {
    throw ParseError(path, line_no,
                     "vertex count mismatch: more rows than the declared " + std::to_string(vertex_it->count));
  }
  return cloud;
}

PointCloud load_xyz(std::istream& in, const std::string& path) {
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    cloud.points.push_back(parse_point(split_ws(body), {0, 1, 2}, path, line_no));
  }
  return cloud;
}

void write_number(std::ostream& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

// Uniform sampling of a rectangle (origin + a*u + b*v) with holes.
struct SampledSurface {
  std::string name;
  Point3 origin;
  Eigen::Vector3d u, v, normal;
  double extent_u = 0.0, extent_v = 0.0;
  std::vector<WallRect> holes;
  PlaneModel plane;

  double net_area() const {
    double a = extent_u * extent_v;
    for (const auto& h : holes) a -= h.area();
    return a;
  }
  bool in_hole(double a, double b) const {
    return std::any_of(holes.begin(), holes.end(),
                       [&](const WallRect& r) { return a >= r.u && a <= r.u + r.w && b >= r.v && b <= r.v + r.h; });
  }
};

bool overlaps(const WallRect& a, const WallRect& b) {
  return a.u < b.u + b.w && b.u < a.u + a.w && a.v < b.v + b.h && b.v < a.v + a.h;
}

}  // namespace

CloudFormat format_from_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ply") return CloudFormat::PlyAscii;
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::Xyz;
  throw InputError("cannot infer point cloud format from extension of " + path.string());
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return format == CloudFormat::PlyAscii ? load_ply(in, path.string()) : load_xyz(in, path.string());
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud[i].allFinite()) {
      throw InputError("refusing to serialize non-finite point " + std::to_string(i) + " to " + path.string());
    }
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  if (format == CloudFormat::PlyAscii) {
    out << "ply\nformat ascii 1.0\ncomment roomtherm\n"
        << "element vertex " << cloud.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\nend_header\n";
  }
  for (const auto& p : cloud.points) {
    write_number(out, p.x());
    out << ' ';
    write_number(out, p.y());
    out << ' ';
    write_number(out, p.z());
    out << '\n';
  }
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

PointCloud transform_cloud(const PointCloud& cloud, const Eigen::Isometry3d& pose) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(pose * p);
  return out;
}

void SyntheticRoomSpec::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw InputError(msg);
  };
  require(std::isfinite(length) && length > 0, "length must be > 0");
  require(std::isfinite(width) && width > 0, "width must be > 0");
  require(std::isfinite(height) && height > 0, "height must be > 0");
  require(std::isfinite(density) && density > 0, "density must be > 0");
  require(std::isfinite(noise_sigma) && noise_sigma >= 0, "noise_sigma must be >= 0");
  require(outlier_fraction >= 0 && outlier_fraction < 1, "outlier_fraction must be in [0, 1)");
  for (std::size_t i = 0; i < openings.size(); ++i) {
    const auto& o = openings[i];
    const std::string tag = "opening " + std::to_string(i) + ": ";
    require(o.wall_index >= 0 && o.wall_index < 4, tag + "wall index must be 0..3");
    const double span = (o.wall_index % 2 == 0) ? length : width;
    const auto& r = o.rect;
    require(r.w > 0 && r.h > 0, tag + "width and height must be > 0");
    require(r.u >= 0 && r.v >= 0 && r.u + r.w <= span + 1e-12 && r.v + r.h <= height + 1e-12,
            tag + "rectangle outside wall extent");
    for (std::size_t j = 0; j < i; ++j) {
      require(!(openings[j].wall_index == o.wall_index && overlaps(openings[j].rect, r)),
              tag + "overlaps opening " + std::to_string(j));
    }
  }
}

WallFrame synthetic_wall_frame(const SyntheticRoomSpec& spec, int index) {
  const Eigen::Vector3d ex = Eigen::Vector3d::UnitX(), ey = Eigen::Vector3d::UnitY();
  switch (index) {
    case 0: return {Point3(0, 0, 0), ex, ey, spec.length};
    case 1: return {Point3(spec.length, 0, 0), ey, ex, spec.width};
    case 2: return {Point3(0, spec.width, 0), ex, ey, spec.length};
    case 3: return {Point3(0, 0, 0), ey, ex, spec.width};
    default: throw InputError("wall index must be 0..3");
  }
}

SyntheticRoom generate_room(const SyntheticRoomSpec& spec) {
  spec.validate();
  const Eigen::Vector3d ez = Eigen::Vector3d::UnitZ();

  std::vector<SampledSurface> surfaces;
  surfaces.push_back({"floor", Point3::Zero(), Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), ez, spec.length,
                      spec.width, {}, PlaneModel(ez, 0.0)});
  for (int i = 0; i < 4; ++i) {
    const auto frame = synthetic_wall_frame(spec, i);
    SampledSurface s{"wall" + std::to_string(i), frame.origin, frame.u_axis, ez, frame.normal, frame.span,
                     spec.height, {}, PlaneModel::through(frame.origin, frame.normal)};
    for (const auto& o : spec.openings) {
      if (o.wall_index == i) s.holes.push_back(o.rect);
    }
    surfaces.push_back(std::move(s));
  }
  if (spec.include_ceiling) {
    surfaces.push_back({"ceiling", Point3(0, 0, spec.height), Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), ez,
                        spec.length, spec.width, {}, PlaneModel(ez, -spec.height)});
  }

  // Largest-remainder allocation so the total is exactly ceil(area * density).
  double total_area = 0.0;
  for (const auto& s : surfaces) total_area += s.net_area();
  const auto total = static_cast<std::size_t>(std::ceil(total_area * spec.density - 1e-9));
  std::vector<std::size_t> counts(surfaces.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const double exact = static_cast<double>(total) * surfaces[i].net_area() / total_area;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[remainders[k].second];

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);

  SyntheticRoom room;
  auto& cloud = room.cloud;
  cloud.points.reserve(total + static_cast<std::size_t>(std::llround(total * spec.outlier_fraction)));
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const auto& s = surfaces[i];
    for (std::size_t n = 0; n < counts[i]; ++n) {
      double a = 0, b = 0;
      do {
        a = unit(rng) * s.extent_u;
        b = unit(rng) * s.extent_v;
      } while (s.in_hole(a, b));
      Point3 p = s.origin + a * s.u + b * s.v;
      if (spec.noise_sigma > 0) p += noise(rng) * s.normal;
      cloud.points.push_back(p);
    }
    room.truth.surfaces.push_back({s.name, s.plane, s.net_area(), counts[i]});
  }

  const auto outliers = static_cast<std::size_t>(std::llround(static_cast<double>(total) * spec.outlier_fraction));
  for (std::size_t n = 0; n < outliers; ++n) {
    const double x = unit(rng) * spec.length;
    const double y = unit(rng) * spec.width;
    const double z = unit(rng) * spec.height;
    cloud.points.emplace_back(x, y, z);
  }

  room.truth.length = spec.length;
  room.truth.width = spec.width;
  room.truth.height = spec.height;
  room.truth.openings = spec.openings;
  room.truth.surface_points = total;
  room.truth.outlier_points = outliers;
  return room;
}

}  // namespace roomtherm
