#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "roomtherm/plane.hpp"

namespace roomtherm {

/// World-frame point in meters, +z up.
using Point3 = Eigen::Vector3d;

struct PointCloud {
  std::vector<Point3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }
};

enum class CloudFormat { PlyAscii, Xyz };

/// Picks the format from the file extension (.ply / .xyz / .txt).
CloudFormat format_from_extension(const std::filesystem::path& path);

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);

PointCloud transform_cloud(const PointCloud& cloud, const Eigen::Isometry3d& pose);

/// Rectangle in a wall's in-plane frame: u along the wall, v up from the floor.
struct WallRect {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
};

struct SyntheticOpening {
  int wall_index = 0;
  WallRect rect;
};

/// Axis-aligned box room with its floor corner at the origin.
///
/// Wall indices: 0 is y = 0, 1 is x = length, 2 is y = width, 3 is x = 0.
/// Every wall frame has u running along +x (walls 0, 2) or +y (walls 1, 3)
/// starting at the room corner, and v = z.
struct SyntheticRoomSpec {
  double length = 5.0;
  double width = 4.0;
  double height = 3.0;
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  double density = 200.0;
  bool include_ceiling = false;
  std::vector<SyntheticOpening> openings;
  std::uint64_t seed = 0;

  /// Throws InputError naming the first invalid field.
  void validate() const;
};

struct GroundTruthSurface {
  std::string name;  // floor, wall0..wall3, ceiling
  PlaneModel plane;
  double area = 0.0;  // net of openings
  std::size_t point_count = 0;
};

struct GroundTruth {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::vector<GroundTruthSurface> surfaces;
  std::vector<SyntheticOpening> openings;
  std::size_t surface_points = 0;
  std::size_t outlier_points = 0;
};

struct SyntheticRoom {
  PointCloud cloud;
  GroundTruth truth;
};

/// Area-weighted uniform sampling of floor, walls and optional ceiling,
/// Gaussian noise along each surface normal, then uniform outliers in the
/// room box. Deterministic for a fixed spec.
SyntheticRoom generate_room(const SyntheticRoomSpec& spec);

/// World-space plane, origin and in-plane axes of wall `index` of an axis-aligned room.
struct WallFrame {
  Point3 origin;
  Eigen::Vector3d u_axis;
  Eigen::Vector3d normal;
  double span = 0.0;
};
WallFrame synthetic_wall_frame(const SyntheticRoomSpec& spec, int index);

}  // namespace roomtherm
