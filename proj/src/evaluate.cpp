#include "roomtherm/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roomtherm/error.hpp"

namespace roomtherm {

std::vector<SurfaceMatch> match_surfaces(std::span<const FitResult> planes, const GroundTruth& truth,
                                         double angle_tol_deg, double offset_tol) {
  std::vector<SurfaceMatch> out;
  for (const auto& surface : truth.surfaces) {
    SurfaceMatch best{surface.name};
    for (const auto& p : planes) {
      const double sign = p.plane.normal.dot(surface.plane.normal) >= 0 ? 1.0 : -1.0;
      const double angle = p.plane.angle_to(surface.plane.normal);
      const double offset = std::abs(sign * p.plane.d - surface.plane.d);
      if (angle + offset * 100.0 < best.angle_deg + best.offset_error * 100.0) {
        best.angle_deg = angle;
        best.offset_error = offset;
      }
    }
    best.ok = best.angle_deg < angle_tol_deg && best.offset_error < offset_tol;
    out.push_back(best);
  }
  return out;
}

SegmentationTrial run_segmentation_trial(const SyntheticRoomSpec& spec, const MsacConfig& msac, std::size_t max_planes,
                                         const RoomConfig& extract, double dims_tol, double yaw_deg) {
  SegmentationTrial t;
  t.seed = spec.seed;
  const auto room = generate_room(spec);
  const auto within = [&](const RoomGeometry& g) {
    return std::abs(g.length - spec.length) <= dims_tol && std::abs(g.width - spec.width) <= dims_tol &&
           std::abs(g.height - spec.height) <= dims_tol;
  };
  try {
    const auto planes = extract_planes(room.cloud, msac, max_planes);
    t.planes = planes.size();
    const auto matches = match_surfaces(planes, room.truth);
    t.planes_ok = std::all_of(matches.begin(), matches.end(), [](const SurfaceMatch& m) { return m.ok; });
    const auto geometry = extract_room(planes, room.cloud, extract);
    t.length = geometry.length;
    t.width = geometry.width;
    t.height = geometry.height;
    t.dims_ok = within(geometry);

    Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
    pose.rotate(Eigen::AngleAxisd(yaw_deg * std::numbers::pi / 180.0, Eigen::Vector3d::UnitZ()));
    const auto yawed = transform_cloud(room.cloud, pose);
    const auto yawed_geometry = extract_room(extract_planes(yawed, msac, max_planes), yawed, extract);
    t.yaw_ok = within(yawed_geometry) && std::abs(yawed_geometry.length - geometry.length) <= dims_tol &&
               std::abs(yawed_geometry.width - geometry.width) <= dims_tol &&
               std::abs(yawed_geometry.height - geometry.height) <= dims_tol;
  } catch (const Error& e) {
    t.error = e.what();
  }
  return t;
}

}  // namespace roomtherm
