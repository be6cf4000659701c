#include "roomtherm/plane_fit.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "roomtherm/error.hpp"

namespace roomtherm {
namespace {

// Sum of truncated squared residuals, abandoned once it reaches `bound`.
double bounded_score(const PlaneModel& plane, const PointCloud& cloud, double t2, double bound) {
  double sum = 0.0;
  for (const auto& p : cloud.points) {
    const double r = plane.signed_distance(p);
    sum += std::min(r * r, t2);
    if (sum >= bound) return sum;
  }
  return sum;
}

std::vector<std::size_t> inliers_of(const PlaneModel& plane, const PointCloud& cloud, double t) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (plane.distance(cloud[i]) <= t) idx.push_back(i);
  }
  return idx;
}

bool satisfies(const std::optional<OrientationConstraint>& c, const PlaneModel& plane) {
  return !c || plane.angle_to(c->reference) <= c->max_angle_deg;
}

}  // namespace

void MsacConfig::validate() const {
  if (!(distance_threshold > 0)) throw InputError("distance_threshold must be > 0");
  if (!(confidence > 0 && confidence < 1)) throw InputError("confidence must be in (0, 1)");
  if (max_iterations < 1) throw InputError("max_iterations must be >= 1");
}

double msac_score(const PlaneModel& plane, const PointCloud& cloud, double threshold) {
  return bounded_score(plane, cloud, threshold * threshold, std::numeric_limits<double>::infinity());
}

std::size_t required_iterations(double confidence, double inlier_ratio, int sample_size) {
  if (inlier_ratio >= 1.0) return 1;
  const double good_sample = std::pow(inlier_ratio, sample_size);
  const double denom = std::log1p(-good_sample);
  if (denom == 0.0) return std::numeric_limits<std::size_t>::max();
  const double n = std::ceil(std::log(1.0 - confidence) / denom);
  if (!(n < 1e18)) return std::numeric_limits<std::size_t>::max();
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

PlaneModel fit_plane_least_squares(const PointCloud& cloud, std::span<const std::size_t> indices) {
  if (indices.size() < 3) throw NoPlaneFound("least-squares plane needs at least 3 points");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (auto i : indices) centroid += cloud[i];
  centroid /= static_cast<double>(indices.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto i : indices) {
    const Eigen::Vector3d q = cloud[i] - centroid;
    cov.noalias() += q * q.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  return PlaneModel::through(centroid, eig.eigenvectors().col(0));
}

FitResult fit_plane(const PointCloud& cloud, const MsacConfig& config) {
  config.validate();
  const std::size_t n = cloud.size();
  if (n < 3) throw NoPlaneFound("need at least 3 points, have " + std::to_string(n));

  const double t = config.distance_threshold;
  const double t2 = t * t;
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::optional<PlaneModel> best;
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t budget = config.max_iterations;
  const std::size_t degenerate_cap = 100 * config.max_iterations + 1000;
  std::size_t degenerate = 0;

  for (std::size_t iter = 0; iter < budget;) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    std::size_t c = pick(rng);
    while (c == a || c == b) c = pick(rng);

    const auto candidate = PlaneModel::from_points(cloud[a], cloud[b], cloud[c]);
    if (!candidate) {
      if (++degenerate > degenerate_cap) break;
      continue;
    }
    ++iter;
    if (!satisfies(config.orientation, *candidate)) continue;

    const double score = bounded_score(*candidate, cloud, t2, best_score);
    if (score < best_score) {
      best_score = score;
      best = candidate;
      const auto inliers = inliers_of(*best, cloud, t).size();
      const double ratio = static_cast<double>(inliers) / static_cast<double>(n);
      if (inliers > 0) budget = std::min(config.max_iterations, required_iterations(config.confidence, ratio));
    }
  }
  if (!best) throw NoPlaneFound("no valid plane hypothesis");

  FitResult result{*best, inliers_of(*best, cloud, t), best_score};
  for (int round = 0; round < 5 && result.inlier_indices.size() >= 3; ++round) {
    const PlaneModel refined = fit_plane_least_squares(cloud, result.inlier_indices);
    if (!satisfies(config.orientation, refined)) break;
    const double score = msac_score(refined, cloud, t);
    if (!(score < result.score)) break;
    result = {refined, inliers_of(refined, cloud, t), score};
  }

  if (result.inlier_indices.size() < config.min_inliers) {
    throw NoPlaneFound("best plane has " + std::to_string(result.inlier_indices.size()) + " inliers, need " +
                       std::to_string(config.min_inliers));
  }
  return result;
}

std::vector<FitResult> extract_planes(const PointCloud& cloud, const MsacConfig& config, std::size_t max_planes) {
  std::vector<FitResult> planes;
  std::vector<std::size_t> remaining(cloud.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});

  while (planes.size() < max_planes && remaining.size() >= std::max<std::size_t>(3, config.min_inliers)) {
    PointCloud subset;
    subset.points.reserve(remaining.size());
    for (auto i : remaining) subset.points.push_back(cloud[i]);

    MsacConfig round = config;
    round.seed = config.seed + planes.size();
    FitResult fit;
    try {
      fit = fit_plane(subset, round);
    } catch (const NoPlaneFound&) {
      break;
    }

    std::vector<char> taken(remaining.size(), 0);
    for (auto& i : fit.inlier_indices) {
      taken[i] = 1;
      i = remaining[i];
    }
    std::vector<std::size_t> rest;
    rest.reserve(remaining.size() - fit.inlier_indices.size());
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      if (!taken[k]) rest.push_back(remaining[k]);
    }
    remaining = std::move(rest);
    planes.push_back(std::move(fit));
  }
  return planes;
}

std::vector<FitResult> assign_inliers(std::span<const PlaneModel> planes, const PointCloud& cloud, double threshold) {
  std::vector<FitResult> out;
  std::vector<char> taken(cloud.size(), 0);
  const double t2 = threshold * threshold;
  for (const auto& plane : planes) {
    FitResult fit{plane, {}, 0.0};
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (taken[i]) continue;
      const double r = plane.signed_distance(cloud[i]);
      fit.score += std::min(r * r, t2);
      if (std::abs(r) <= threshold) {
        fit.inlier_indices.push_back(i);
        taken[i] = 1;
      }
    }
    out.push_back(std::move(fit));
  }
  return out;
}

}  // namespace roomtherm
