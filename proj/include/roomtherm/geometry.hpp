#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "roomtherm/pointcloud.hpp"

namespace roomtherm {

enum class OpeningKind { Window, Door, Unknown };

std::string to_string(OpeningKind kind);
OpeningKind opening_kind_from_string(const std::string& s);

struct OpeningRecord {
  OpeningKind kind = OpeningKind::Window;
  WallRect rect;

  double area() const { return rect.area(); }
};

struct WallRecord {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitX();
  double d = 0.0;
  double span = 0.0;
  double height = 0.0;
  std::vector<OpeningRecord> openings;
  bool synthesized = false;

  double gross_area() const { return span * height; }
  double openings_area() const;
  double net_area() const { return gross_area() - openings_area(); }
};

/// Simulation-ready room: the contract between geometry extraction and the
/// thermal model. Areas in m^2, lengths in m.
struct BuildingGeometry {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::vector<WallRecord> walls;

  double floor_area() const { return length * width; }
  double roof_area() const { return length * width; }
  double volume() const { return length * width * height; }

  /// Throws GeometryError on non-positive dimensions or openings larger
  /// than their wall.
  void validate() const;
};

/// Axis-aligned box room with the given openings (wall indices as in
/// SyntheticRoomSpec). Openings touching the floor at least 1.8 m tall are doors.
BuildingGeometry box_geometry(double length, double width, double height,
                              const std::vector<SyntheticOpening>& openings = {});

}  // namespace roomtherm
