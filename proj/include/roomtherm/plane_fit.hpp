#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roomtherm/plane.hpp"
#include "roomtherm/pointcloud.hpp"

namespace roomtherm {

struct OrientationConstraint {
  Eigen::Vector3d reference = Eigen::Vector3d::UnitZ();
  double max_angle_deg = 10.0;
};

struct MsacConfig {
  double distance_threshold = 0.02;  // meters
  double confidence = 0.99;
  std::size_t max_iterations = 1000;
  std::size_t min_inliers = 50;
  std::optional<OrientationConstraint> orientation;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitResult {
  PlaneModel plane;
  std::vector<std::size_t> inlier_indices;  // ascending, into the input cloud
  double score = 0.0;                       // MSAC loss in m^2
};

inline double point_plane_distance(const PlaneModel& plane, const Point3& point) { return plane.distance(point); }

/// Truncated quadratic loss sum_i min(r_i^2, t^2).
double msac_score(const PlaneModel& plane, const PointCloud& cloud, double threshold);

/// RANSAC trial count ceil(log(1-p) / log(1-w^n)); 1 when w == 1.
std::size_t required_iterations(double confidence, double inlier_ratio, int sample_size = 3);

/// Least-squares plane through the given points (centroid + eigenvector of
/// the smallest covariance eigenvalue). Needs at least three points.
PlaneModel fit_plane_least_squares(const PointCloud& cloud, std::span<const std::size_t> indices);

/// MSAC plane fit with adaptive stopping and least-squares refinement.
/// Throws NoPlaneFound when the best model has fewer than min_inliers.
FitResult fit_plane(const PointCloud& cloud, const MsacConfig& config);

/// Sequential extraction: fit, record, remove inliers, repeat.
std::vector<FitResult> extract_planes(const PointCloud& cloud, const MsacConfig& config, std::size_t max_planes);

/// Rebuilds disjoint inlier sets for planes listed in extraction order:
/// each point goes to the first plane within `threshold` of it.
std::vector<FitResult> assign_inliers(std::span<const PlaneModel> planes, const PointCloud& cloud, double threshold);

}  // namespace roomtherm
