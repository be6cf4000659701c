#include "roomtherm/geometry.hpp"

#include "roomtherm/error.hpp"

namespace roomtherm {

std::string to_string(OpeningKind kind) {
  switch (kind) {
    case OpeningKind::Window: return "window";
    case OpeningKind::Door: return "door";
    case OpeningKind::Unknown: return "unknown";
  }
  return "unknown";
}

OpeningKind opening_kind_from_string(const std::string& s) {
  if (s == "window") return OpeningKind::Window;
  if (s == "door") return OpeningKind::Door;
  if (s == "unknown") return OpeningKind::Unknown;
  throw InputError("unknown opening kind '" + s + "'");
}

double WallRecord::openings_area() const {
  double a = 0.0;
  for (const auto& o : openings) a += o.area();
  return a;
}

void BuildingGeometry::validate() const {
  if (!(length > 0 && width > 0 && height > 0)) throw GeometryError("room dimensions must be positive");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const auto& w = walls[i];
    if (!(w.span > 0 && w.height > 0)) throw GeometryError("wall " + std::to_string(i) + " has no area");
    for (const auto& o : w.openings) {
      if (!(o.rect.w > 0 && o.rect.h > 0)) throw GeometryError("wall " + std::to_string(i) + " has an empty opening");
    }
    if (w.openings_area() > w.gross_area()) {
      throw GeometryError("openings on wall " + std::to_string(i) + " exceed its area (" +
                          std::to_string(w.openings_area()) + " > " + std::to_string(w.gross_area()) + " m^2)");
    }
  }
}

BuildingGeometry box_geometry(double length, double width, double height,
                              const std::vector<SyntheticOpening>& openings) {
  BuildingGeometry g{length, width, height, {}};
  const Eigen::Vector3d ex = Eigen::Vector3d::UnitX(), ey = Eigen::Vector3d::UnitY();
  g.walls = {{ey, 0.0, length, height, {}, false},
             {ex, -length, width, height, {}, false},
             {ey, -width, length, height, {}, false},
             {ex, 0.0, width, height, {}, false}};
  for (const auto& o : openings) {
    if (o.wall_index < 0 || o.wall_index > 3) throw GeometryError("wall index must be 0..3");
    const bool door = o.rect.v <= 1e-9 && o.rect.h >= 1.8;
    g.walls[o.wall_index].openings.push_back({door ? OpeningKind::Door : OpeningKind::Window, o.rect});
  }
  g.validate();
  return g;
}

}  // namespace roomtherm
