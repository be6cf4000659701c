#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace roomtherm {

/// Infinite plane {p : normal.dot(p) + d == 0} with a unit normal whose
/// largest-magnitude component is positive.
template <typename Scalar>
struct Plane {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Vector3 normal = Vector3::UnitZ();
  Scalar d = Scalar(0);

  Plane() = default;

  /// Normalizes and canonicalizes. `normal` must be nonzero.
  Plane(const Vector3& n, Scalar offset) : normal(n), d(offset) {
    const Scalar len = normal.norm();
    normal /= len;
    d /= len;
    canonicalize();
  }

  static Plane through(const Vector3& point, const Vector3& n) {
    return Plane(n, -n.dot(point));
  }

  /// Plane through three points, or nullopt when they are collinear
  /// (cross-product norm at or below `degeneracy_eps`).
  static std::optional<Plane> from_points(const Vector3& a, const Vector3& b, const Vector3& c,
                                          Scalar degeneracy_eps = Scalar(1e-9)) {
    const Vector3 n = (b - a).cross(c - a);
    if (!(n.norm() > degeneracy_eps)) return std::nullopt;
    return Plane(n, -n.dot(a));
  }

  template <typename Derived>
  Scalar signed_distance(const Eigen::MatrixBase<Derived>& p) const {
    return normal.dot(p) + d;
  }

  template <typename Derived>
  Scalar distance(const Eigen::MatrixBase<Derived>& p) const {
    return std::abs(signed_distance(p));
  }

  template <typename Derived>
  Vector3 project(const Eigen::MatrixBase<Derived>& p) const {
    return p - signed_distance(p) * normal;
  }

  /// Angle between the two normals in degrees, ignoring orientation.
  Scalar angle_to(const Vector3& other_normal) const {
    const Scalar c = std::min(Scalar(1), std::abs(normal.dot(other_normal.normalized())));
    return std::acos(c) * Scalar(180) / Scalar(M_PI);
  }

  Plane transformed(const Eigen::Transform<Scalar, 3, Eigen::Isometry>& pose) const {
    const Vector3 n = pose.linear() * normal;
    const Vector3 p = pose * (-d * normal);
    return through(p, n);
  }

 private:
  void canonicalize() {
    Eigen::Index largest = 0;
    normal.cwiseAbs().maxCoeff(&largest);
    if (normal[largest] < Scalar(0)) {
      normal = -normal;
      d = -d;
    }
  }
};

using PlaneModel = Plane<double>;

/// Unit vector with the same canonical sign rule as Plane normals.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> canonical_direction(const Eigen::Matrix<Scalar, 3, 1>& v) {
  Eigen::Index largest = 0;
  v.cwiseAbs().maxCoeff(&largest);
  const Eigen::Matrix<Scalar, 3, 1> u = v.normalized();
  return u[largest] < Scalar(0) ? Eigen::Matrix<Scalar, 3, 1>(-u) : u;
}

}  // namespace roomtherm
