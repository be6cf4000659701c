#include "roomtherm/room_extract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <Eigen/Eigenvalues>

#include "roomtherm/error.hpp"

namespace roomtherm {
namespace {

constexpr double kDegToRad = M_PI / 180.0;
const Eigen::Vector3d kUp = Eigen::Vector3d::UnitZ();

Eigen::Vector3d horizontal(const Eigen::Vector3d& v) {
  Eigen::Vector3d h = v - v.dot(kUp) * kUp;
  return h.normalized();
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Eigen::Vector3d centroid_of(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (auto i : idx) c += cloud[i];
  return idx.empty() ? c : Eigen::Vector3d(c / static_cast<double>(idx.size()));
}

// Height of a (near-)horizontal plane above the point (x, y).
double plane_height_at(const PlaneModel& plane, double x, double y) {
  const auto& n = plane.normal;
  return -(plane.d + n.x() * x + n.y() * y) / n.z();
}

std::pair<double, double> projected_range(const PointCloud& cloud, const std::vector<std::size_t>& idx,
                                          const Eigen::Vector3d& axis) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto i : idx) {
    const double s = axis.dot(cloud[i]);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

struct CellRect {
  int c0 = 0, c1 = 0, r0 = 0, r1 = 0;  // half-open
  int area() const { return (c1 - c0) * (r1 - r0); }
};

// Largest all-true axis-aligned rectangle in a row-major mask (histogram method).
CellRect largest_rectangle(const std::vector<char>& mask, int cols, int rows) {
  std::vector<int> heights(cols, 0);
  CellRect best;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) heights[c] = mask[r * cols + c] ? heights[c] + 1 : 0;
    std::vector<int> stack;
    for (int c = 0; c <= cols; ++c) {
      const int h = c < cols ? heights[c] : 0;
      while (!stack.empty() && heights[stack.back()] >= h) {
        const int top = stack.back();
        stack.pop_back();
        const int left = stack.empty() ? 0 : stack.back() + 1;
        const CellRect cand{left, c, r - heights[top] + 1, r + 1};
        if (heights[top] > 0 && cand.area() > best.area()) best = cand;
      }
      stack.push_back(c);
    }
  }
  return best;
}

// Smallest value followed by two more within `gap`; nullopt if none.
std::optional<double> first_dense(std::vector<double> values, double gap) {
  std::sort(values.begin(), values.end());
  for (std::size_t i = 0; i + 2 < values.size(); ++i) {
    if (values[i + 2] - values[i] <= gap) return values[i];
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(SurfaceLabel label) {
  switch (label) {
    case SurfaceLabel::Floor: return "floor";
    case SurfaceLabel::Ceiling: return "ceiling";
    case SurfaceLabel::Wall: return "wall";
    case SurfaceLabel::Unknown: return "unknown";
  }
  return "unknown";
}

bool is_horizontal(const PlaneModel& plane, double angle_tol_deg) {
  return std::abs(plane.normal.dot(kUp)) >= std::cos(angle_tol_deg * kDegToRad);
}

bool is_vertical(const PlaneModel& plane, double angle_tol_deg) {
  return std::abs(plane.normal.dot(kUp)) <= std::sin(angle_tol_deg * kDegToRad);
}

LabeledSurface describe_surface(const FitResult& fit, std::size_t source_index, const PointCloud& cloud,
                                SurfaceLabel label) {
  LabeledSurface s;
  s.source_index = source_index;
  s.plane = fit.plane;
  s.label = label;
  s.inliers = fit.inlier_indices;

  const Eigen::Vector3d& n = fit.plane.normal;
  Eigen::Vector3d u;
  if (std::abs(n.z()) < std::sqrt(0.5)) {
    u = canonical_direction<double>(kUp.cross(n));
  } else {
    // In-plane principal direction of the inliers.
    const Eigen::Vector3d c = centroid_of(cloud, s.inliers);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto i : s.inliers) {
      const Eigen::Vector3d q = fit.plane.project(cloud[i]) - c;
      cov.noalias() += q * q.transpose();
    }
    u = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov).eigenvectors().col(2);
    u = u - u.dot(n) * n;
    if (u.norm() < 1e-9) u = Eigen::Vector3d::UnitX() - n.x() * n;
    u = canonical_direction<double>(u);
  }
  Eigen::Vector3d v = n.cross(u);
  if (v.z() < 0 || (v.z() == 0 && canonical_direction<double>(v) != v)) v = -v;

  const Eigen::Vector3d p0 = -fit.plane.d * n;
  double umin = std::numeric_limits<double>::infinity(), umax = -umin, vmin = umin, vmax = -umin;
  double zmin = umin, zmax = -umin, zsum = 0.0;
  for (auto i : s.inliers) {
    const Eigen::Vector3d q = cloud[i] - p0;
    umin = std::min(umin, u.dot(q));
    umax = std::max(umax, u.dot(q));
    vmin = std::min(vmin, v.dot(q));
    vmax = std::max(vmax, v.dot(q));
    zmin = std::min(zmin, cloud[i].z());
    zmax = std::max(zmax, cloud[i].z());
    zsum += cloud[i].z();
  }
  if (!s.inliers.empty()) {
    s.extent = {p0 + umin * u + vmin * v, u, v, umax - umin, vmax - vmin};
    s.vertical_extent = zmax - zmin;
    s.mean_z = zsum / static_cast<double>(s.inliers.size());
    s.max_z = zmax;
  } else {
    s.extent = {p0, u, v, 0.0, 0.0};
  }
  return s;
}

LabeledSurface detect_floor(std::span<const FitResult> planes, const PointCloud& cloud, double angle_tol_deg) {
  std::optional<LabeledSurface> floor;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (!is_horizontal(planes[i].plane, angle_tol_deg) || planes[i].inlier_indices.empty()) continue;
    auto s = describe_surface(planes[i], i, cloud, SurfaceLabel::Floor);
    if (!floor || s.mean_z < floor->mean_z) floor = std::move(s);
  }
  if (!floor) {
    throw StageError("no floor: none of " + std::to_string(planes.size()) + " planes is within " +
                     std::to_string(angle_tol_deg) + " deg of horizontal");
  }
  return *floor;
}

std::vector<LabeledSurface> label_surfaces(std::span<const FitResult> planes, const PointCloud& cloud,
                                           const LabeledSurface& floor, const LabelConfig& config) {
  std::vector<LabeledSurface> out;
  out.reserve(planes.size());
  double tallest = 0.0;
  std::optional<std::size_t> top;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    auto s = describe_surface(planes[i], i, cloud);
    if (i == floor.source_index) {
      s.label = SurfaceLabel::Floor;
    } else if (is_vertical(s.plane, config.angle_tol_deg)) {
      tallest = std::max(tallest, s.vertical_extent);
    } else if (is_horizontal(s.plane, config.angle_tol_deg) && !s.inliers.empty()) {
      if (!top || s.mean_z > out[*top].mean_z) top = i;
    }
    out.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i == floor.source_index || !is_vertical(out[i].plane, config.angle_tol_deg)) continue;
    out[i].label = out[i].vertical_extent >= config.height_fraction * tallest ? SurfaceLabel::Wall
                                                                              : SurfaceLabel::Unknown;
  }
  if (top && out[*top].mean_z - floor.mean_z >= config.min_ceiling_clearance) out[*top].label = SurfaceLabel::Ceiling;
  return out;
}

RoomDimensions room_dimensions(const LabeledSurface& floor, std::span<const LabeledSurface> walls,
                               const PointCloud& cloud, const LabeledSurface* ceiling, double perpendicular_tol_deg) {
  if (walls.size() < 2) {
    throw GeometryError("need at least 2 walls to measure the room, found " + std::to_string(walls.size()));
  }
  const auto dominant = std::max_element(walls.begin(), walls.end(), [](const auto& a, const auto& b) {
    return a.inliers.size() < b.inliers.size();
  });
  const Eigen::Vector3d axis_a = canonical_direction<double>(horizontal(dominant->plane.normal));
  const Eigen::Vector3d axis_b = canonical_direction<double>(kUp.cross(axis_a));
  const double cos_tol = std::cos(perpendicular_tol_deg * kDegToRad);
  const double sin_tol = std::sin(perpendicular_tol_deg * kDegToRad);

  // Group 0: normals along axis_a; group 1: along axis_b.
  std::vector<int> group(walls.size());
  std::vector<double> position(walls.size());
  int counts[2] = {0, 0};
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const double c = std::abs(horizontal(walls[i].plane.normal).dot(axis_a));
    if (c >= cos_tol) {
      group[i] = 0;
    } else if (c <= sin_tol) {
      group[i] = 1;
    } else {
      throw GeometryError("non-rectangular room: wall " + std::to_string(i) + " is " +
                          std::to_string(std::acos(std::min(1.0, c)) / kDegToRad) + " deg off the dominant wall");
    }
    ++counts[group[i]];
    const Eigen::Vector3d& axis = group[i] == 0 ? axis_a : axis_b;
    position[i] = axis.dot(centroid_of(cloud, walls[i].inliers));
  }
  if (counts[1] == 0) {
    throw GeometryError("need two non-parallel walls; all " + std::to_string(walls.size()) +
                        " walls are parallel to the dominant wall");
  }

  double span[2], lo[2];
  for (int g = 0; g < 2; ++g) {
    const Eigen::Vector3d& axis = g == 0 ? axis_a : axis_b;
    double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
    for (std::size_t i = 0; i < walls.size(); ++i) {
      if (group[i] != g) continue;
      pmin = std::min(pmin, position[i]);
      pmax = std::max(pmax, position[i]);
    }
    if (pmax - pmin > 0.1) {
      span[g] = pmax - pmin;
      lo[g] = pmin;
    } else {
      // One wall in this direction: the floor extent closes the room.
      const auto [fmin, fmax] = projected_range(cloud, floor.inliers, axis);
      if (!(fmax > fmin)) throw GeometryError("floor has no extent to close the room");
      lo[g] = std::abs(pmin - fmin) < std::abs(pmax - fmax) ? pmin : fmin;
      const double hi = std::abs(pmin - fmin) < std::abs(pmax - fmax) ? fmax : pmax;
      span[g] = hi - lo[g];
    }
  }

  RoomDimensions dims;
  const Eigen::Vector3d fc = centroid_of(cloud, floor.inliers);
  dims.floor_level = plane_height_at(floor.plane, fc.x(), fc.y());
  if (ceiling != nullptr) {
    dims.height = plane_height_at(ceiling->plane, fc.x(), fc.y()) - dims.floor_level;
  } else {
    std::vector<double> tops;
    for (const auto& w : walls) tops.push_back(w.max_z - dims.floor_level);
    dims.height = median(std::move(tops));
  }
  if (!(dims.height > 0)) throw GeometryError("room height is not positive");

  // Walls with normals along axis_a run along axis_b, so their span is span[1].
  const bool a_is_length = span[1] >= span[0];
  const int length_group = a_is_length ? 1 : 0;
  dims.length = span[length_group];
  dims.width = span[1 - length_group];
  dims.length_axis = length_group == 0 ? axis_a : axis_b;
  dims.width_axis = length_group == 0 ? axis_b : axis_a;
  dims.length_min = lo[length_group];
  dims.width_min = lo[1 - length_group];
  for (std::size_t i = 0; i < walls.size(); ++i) dims.wall_spans.push_back(span[1 - group[i]]);
  return dims;
}

std::vector<Opening> detect_openings(const LabeledSurface& wall, const PointCloud& cloud, double floor_level,
                                     double u_origin, double span, double height, const OpeningConfig& config) {
  // Cells must be large enough that solid wall is rarely empty by chance.
  const double density = static_cast<double>(wall.inliers.size()) / std::max(span * height, 1e-9);
  const double res = std::max(config.grid_res, std::sqrt(config.min_cell_points / std::max(density, 1e-9)));
  const int cols = std::max(1, static_cast<int>(std::ceil(span / res - 1e-9)));
  const int rows = std::max(1, static_cast<int>(std::ceil(height / res - 1e-9)));
  const Eigen::Vector3d& u_axis = wall.extent.u_axis;

  struct Sample {
    double u, v;
    int cell;
  };
  std::vector<Sample> samples;
  std::vector<int> count(static_cast<std::size_t>(cols * rows), 0);
  for (auto i : wall.inliers) {
    const double u = u_axis.dot(cloud[i]) - u_origin;
    const double v = cloud[i].z() - floor_level;
    if (u < 0 || u > span || v < 0 || v > height) continue;
    const int c = std::min(cols - 1, static_cast<int>(u / res));
    const int r = std::min(rows - 1, static_cast<int>(v / res));
    samples.push_back({u, v, r * cols + c});
    ++count[r * cols + c];
  }

  // Small occupied islands are clutter (stray points inside a hole).
  std::vector<char> occupied(count.size(), 0);
  {
    std::vector<char> seen(count.size(), 0);
    for (int start = 0; start < rows * cols; ++start) {
      if (count[start] == 0 || seen[start]) continue;
      std::vector<int> island{start};
      seen[start] = 1;
      for (std::size_t k = 0; k < island.size(); ++k) {
        const int r = island[k] / cols, c = island[k] % cols;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
            const int id = rr * cols + cc;
            if (count[id] > 0 && !seen[id]) {
              seen[id] = 1;
              island.push_back(id);
            }
          }
        }
      }
      if (static_cast<int>(island.size()) < config.min_island_cells) continue;
      for (int id : island) occupied[id] = 1;
    }
  }

  std::vector<Opening> openings;
  std::vector<int> component(count.size(), -1);
  int next_id = 0;
  for (int start = 0; start < rows * cols; ++start) {
    if (occupied[start] || component[start] >= 0) continue;
    // Flood fill one empty component.
    std::vector<char> mask(count.size(), 0);
    bool touches_side = false;
    std::queue<int> frontier;
    frontier.push(start);
    component[start] = next_id;
    while (!frontier.empty()) {
      const int cell = frontier.front();
      frontier.pop();
      mask[cell] = 1;
      const int r = cell / cols, c = cell % cols;
      if (c == 0 || c == cols - 1 || r == rows - 1) touches_side = true;
      const int nbrs[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& nb : nbrs) {
        if (nb[0] < 0 || nb[0] >= rows || nb[1] < 0 || nb[1] >= cols) continue;
        const int id = nb[0] * cols + nb[1];
        if (!occupied[id] && component[id] < 0) {
          component[id] = next_id;
          frontier.push(id);
        }
      }
    }
    ++next_id;
    if (touches_side) continue;

    const CellRect cells = largest_rectangle(mask, cols, rows);
    if (cells.area() == 0) continue;
    double u0 = cells.c0 * res, u1 = cells.c1 * res, v0 = cells.r0 * res, v1 = cells.r1 * res;
    const bool on_floor = cells.r0 == 0;

    // Snap each edge to the nearest dense run of wall points beyond it. Only
    // points well inside the perpendicular range count, so corner points
    // cannot block, and a lone stray point is skipped.
    const double margin = 0.5 * res;
    std::vector<double> lefts, rights;
    for (const auto& s : samples) {
      if (!occupied[s.cell] || s.v <= v0 + margin || s.v >= v1 - margin) continue;
      if (s.u <= u0) lefts.push_back(-s.u);
      if (s.u >= u1) rights.push_back(s.u);
    }
    if (const auto left = first_dense(lefts, margin)) u0 = -*left;
    if (const auto right = first_dense(rights, margin)) u1 = *right;
    std::vector<double> bottoms, tops;
    for (const auto& s : samples) {
      if (!occupied[s.cell] || s.u <= u0 + margin || s.u >= u1 - margin) continue;
      if (s.v <= v0) bottoms.push_back(-s.v);
      if (s.v >= v1) tops.push_back(s.v);
    }
    if (on_floor) {
      v0 = 0.0;
    } else if (const auto bottom = first_dense(bottoms, margin)) {
      v0 = -*bottom;
    }
    if (const auto top = first_dense(tops, margin)) v1 = *top;

    const WallRect rect{u0, v0, u1 - u0, v1 - v0};
    if (rect.area() < config.min_area) continue;
    const OpeningKind kind = on_floor && rect.h >= config.door_min_height ? OpeningKind::Door : OpeningKind::Window;
    openings.push_back({0, rect, kind});
  }
  return openings;
}

RoomGeometry extract_room(std::span<const FitResult> planes, const PointCloud& cloud, const RoomConfig& config) {
  const LabeledSurface floor = detect_floor(planes, cloud, config.labels.angle_tol_deg);
  const auto labeled = label_surfaces(planes, cloud, floor, config.labels);

  RoomGeometry room;
  for (const auto& s : labeled) {
    if (s.label == SurfaceLabel::Floor) room.floor = s;
    if (s.label == SurfaceLabel::Wall) room.walls.push_back(s);
    if (s.label == SurfaceLabel::Ceiling) room.ceiling = s;
  }
  const auto dims = room_dimensions(room.floor, room.walls, cloud, room.ceiling ? &*room.ceiling : nullptr,
                                    config.perpendicular_tol_deg);
  room.length = dims.length;
  room.width = dims.width;
  room.height = dims.height;
  room.floor_level = dims.floor_level;
  room.wall_spans = dims.wall_spans;
  room.length_axis = dims.length_axis;
  room.width_axis = dims.width_axis;
  room.length_min = dims.length_min;
  room.width_min = dims.width_min;

  for (std::size_t i = 0; i < room.walls.size(); ++i) {
    auto& wall = room.walls[i];
    // Run each wall frame along the room axis it is parallel to, from the room corner.
    const bool along_length = std::abs(wall.plane.normal.dot(dims.length_axis)) <
                              std::abs(wall.plane.normal.dot(dims.width_axis));
    wall.extent.u_axis = along_length ? dims.length_axis : dims.width_axis;
    const double u_origin = along_length ? dims.length_min : dims.width_min;
    room.wall_u_origins.push_back(u_origin);
    for (auto o : detect_openings(wall, cloud, dims.floor_level, u_origin, dims.wall_spans[i], dims.height,
                                  config.openings)) {
      o.wall_index = i;
      room.openings.push_back(o);
    }
  }
  return room;
}

BuildingGeometry to_building_geometry(const RoomGeometry& room) {
  BuildingGeometry g{room.length, room.width, room.height, {}};
  int along_length = 0, along_width = 0;
  for (std::size_t i = 0; i < room.walls.size(); ++i) {
    const auto& w = room.walls[i];
    WallRecord rec{w.plane.normal, w.plane.d, room.wall_spans[i], room.height, {}, false};
    for (const auto& o : room.openings) {
      if (o.wall_index == i) rec.openings.push_back({o.kind, o.rect});
    }
    const bool runs_along_length =
        std::abs(w.plane.normal.dot(room.length_axis)) < std::abs(w.plane.normal.dot(room.width_axis));
    (runs_along_length ? along_length : along_width)++;
    g.walls.push_back(std::move(rec));
  }

  // Close the envelope: a direction seen through one wall gets its opposite wall.
  auto synthesize = [&](const Eigen::Vector3d& axis, double lo, double extent, double span) {
    double existing = 0.0;
    for (const auto& w : room.walls) {
      if (std::abs(w.plane.normal.dot(axis)) > 0.5) existing = -w.plane.d * w.plane.normal.dot(axis);
    }
    const double missing = std::abs(existing - lo) < std::abs(existing - (lo + extent)) ? lo + extent : lo;
    const Eigen::Vector3d n = canonical_direction<double>(axis);
    g.walls.push_back({n, -n.dot(missing * axis), span, room.height, {}, true});
  };
  if (along_length == 1) synthesize(room.width_axis, room.width_min, room.width, room.length);
  if (along_width == 1) synthesize(room.length_axis, room.length_min, room.length, room.width);

  g.validate();
  return g;
}

}  // namespace roomtherm
