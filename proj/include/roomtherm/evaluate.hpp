#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roomtherm/plane_fit.hpp"
#include "roomtherm/pointcloud.hpp"
#include "roomtherm/room_extract.hpp"

namespace roomtherm {

/// Best-matching detected plane for one ground-truth surface. Offsets are
/// compared after orienting both normals the same way.
struct SurfaceMatch {
  std::string name;
  double angle_deg = 180.0;
  double offset_error = 1e9;
  bool ok = false;
};

std::vector<SurfaceMatch> match_surfaces(std::span<const FitResult> planes, const GroundTruth& truth,
                                         double angle_tol_deg = 1.0, double offset_tol = 0.01);

struct SegmentationTrial {
  std::uint64_t seed = 0;
  std::size_t planes = 0;
  bool planes_ok = false;  // every truth surface matched
  bool dims_ok = false;    // length, width, height within tolerance
  bool yaw_ok = false;     // same after rotating the cloud about +z
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::string error;
};

/// Generate, segment and extract one room; then repeat on a yawed copy.
/// The MSAC seed is taken from `msac.seed` as given.
SegmentationTrial run_segmentation_trial(const SyntheticRoomSpec& spec, const MsacConfig& msac, std::size_t max_planes,
                                         const RoomConfig& extract, double dims_tol = 0.02, double yaw_deg = 30.0);

}  // namespace roomtherm
