#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roomtherm/geometry.hpp"
#include "roomtherm/plane_fit.hpp"

namespace roomtherm {

enum class SurfaceLabel { Floor, Ceiling, Wall, Unknown };

std::string to_string(SurfaceLabel label);

/// Bounding rectangle of a surface's inliers in its own plane.
struct PlaneExtent {
  Point3 origin = Point3::Zero();  // corner at (min u, min v)
  Eigen::Vector3d u_axis = Eigen::Vector3d::UnitX();
  Eigen::Vector3d v_axis = Eigen::Vector3d::UnitY();
  double width = 0.0;
  double height = 0.0;
};

struct LabeledSurface {
  std::size_t source_index = 0;  // position in the plane list it came from
  PlaneModel plane;
  SurfaceLabel label = SurfaceLabel::Unknown;
  PlaneExtent extent;
  double vertical_extent = 0.0;  // max inlier z - min inlier z
  double mean_z = 0.0;
  double max_z = 0.0;
  std::vector<std::size_t> inliers;
};

struct Opening {
  std::size_t wall_index = 0;
  WallRect rect;
  OpeningKind kind = OpeningKind::Unknown;
};

struct RoomGeometry {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double floor_level = 0.0;
  LabeledSurface floor;
  std::vector<LabeledSurface> walls;
  std::vector<double> wall_spans;        // horizontal length of each wall
  std::vector<double> wall_u_origins;    // u coordinate of the room corner in each wall frame
  std::optional<LabeledSurface> ceiling;
  std::vector<Opening> openings;
  Eigen::Vector3d length_axis = Eigen::Vector3d::UnitX();
  Eigen::Vector3d width_axis = Eigen::Vector3d::UnitY();
  double length_min = 0.0;  // room boundary positions along the two axes
  double width_min = 0.0;
};

struct LabelConfig {
  double angle_tol_deg = 5.0;
  double height_fraction = 0.8;
  double min_ceiling_clearance = 1.0;
};

struct OpeningConfig {
  double grid_res = 0.1;          // smallest cell size, m
  double min_cell_points = 6.0;   // expected wall points per cell; coarsens the grid on sparse walls
  double min_area = 0.3;
  double door_min_height = 1.8;
  int min_island_cells = 4;  // smaller 8-connected groups of occupied cells are ignored
};

struct RoomConfig {
  LabelConfig labels;
  OpeningConfig openings;
  double perpendicular_tol_deg = 10.0;
};

bool is_horizontal(const PlaneModel& plane, double angle_tol_deg);
bool is_vertical(const PlaneModel& plane, double angle_tol_deg);

/// Describes one plane's inliers: extent, vertical extent, mean height.
LabeledSurface describe_surface(const FitResult& fit, std::size_t source_index, const PointCloud& cloud,
                                SurfaceLabel label = SurfaceLabel::Unknown);

/// Lowest horizontal plane (by mean inlier z). Throws StageError when no
/// plane is horizontal.
LabeledSurface detect_floor(std::span<const FitResult> planes, const PointCloud& cloud, double angle_tol_deg = 5.0);

/// One label per input plane, in input order.
std::vector<LabeledSurface> label_surfaces(std::span<const FitResult> planes, const PointCloud& cloud,
                                           const LabeledSurface& floor, const LabelConfig& config = {});

struct RoomDimensions {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double floor_level = 0.0;
  Eigen::Vector3d length_axis = Eigen::Vector3d::UnitX();
  Eigen::Vector3d width_axis = Eigen::Vector3d::UnitY();
  double length_min = 0.0;
  double width_min = 0.0;
  std::vector<double> wall_spans;
};

/// Spans between opposite walls in a frame aligned to the dominant wall
/// normal. Falls back to the floor extent when a direction has one wall.
RoomDimensions room_dimensions(const LabeledSurface& floor, std::span<const LabeledSurface> walls,
                               const PointCloud& cloud, const LabeledSurface* ceiling = nullptr,
                               double perpendicular_tol_deg = 10.0);

/// Occupancy-grid opening detection over one wall. `u_origin`/`span` locate
/// the wall along its horizontal axis; v is height above `floor_level`.
std::vector<Opening> detect_openings(const LabeledSurface& wall, const PointCloud& cloud, double floor_level,
                                     double u_origin, double span, double height, const OpeningConfig& config = {});

/// detect_floor -> label_surfaces -> room_dimensions -> detect_openings.
RoomGeometry extract_room(std::span<const FitResult> planes, const PointCloud& cloud, const RoomConfig& config = {});

/// Flattens a room into the simulation record. Directions with a single
/// detected wall get a synthesized opposite wall so the envelope is closed.
BuildingGeometry to_building_geometry(const RoomGeometry& room);

}  // namespace roomtherm
