#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pcreg {

using Point3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

/// An ordered set of 3-D points. Row i of an associated DescriptorSet
/// describes points[i].
struct PointCloud {
  std::vector<Point3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }
};

/// Rigid motion x -> rotation * x + translation.
class RigidMotion {
public:
  RigidMotion() : rotation_(Matrix3::Identity()), translation_(Vector3::Zero()) {}
  RigidMotion(const Matrix3& rotation, const Vector3& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidMotion identity() { return {}; }
  static RigidMotion from_translation(const Vector3& t) { return {Matrix3::Identity(), t}; }
  static RigidMotion from_rotation(const Matrix3& r) { return {r, Vector3::Zero()}; }

  const Matrix3& rotation() const { return rotation_; }
  const Vector3& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }

  /// Orthonormality and det = +1, both element-wise within `tol`.
  bool is_valid(double tol = 1e-9) const;

private:
  Matrix3 rotation_;
  Vector3 translation_;
};

/// Motion that applies `b` first, then `a`.
RigidMotion compose(const RigidMotion& a, const RigidMotion& b);
RigidMotion inverse(const RigidMotion& t);
inline Point3 apply(const RigidMotion& t, const Point3& p) { return t.apply(p); }
PointCloud transform(const RigidMotion& t, const PointCloud& cloud);

/// Largest element-wise difference between two motions (rotation and translation blocks).
double max_abs_difference(const RigidMotion& a, const RigidMotion& b);

/// Rotation about a principal axis by an angle in degrees.
Matrix3 rot_x(double deg);
Matrix3 rot_y(double deg);
Matrix3 rot_z(double deg);

/// Intrinsic Z-Y-X angles in degrees: R = Rz(yaw) * Ry(pitch) * Rx(roll).
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

class GimbalLockError : public std::domain_error {
public:
  explicit GimbalLockError(double pitch_deg);
  double pitch_deg() const { return pitch_deg_; }

private:
  double pitch_deg_;
};

/// Pitch magnitudes at or beyond 90 - kGimbalGuardDeg are refused.
inline constexpr double kGimbalGuardDeg = 1e-6;

/// Throws GimbalLockError when |pitch| >= 90 - kGimbalGuardDeg.
EulerAngles to_euler(const Matrix3& rotation);
inline EulerAngles to_euler(const RigidMotion& t) { return to_euler(t.rotation()); }
Matrix3 from_euler(const EulerAngles& e);

/// Voxel grid with origin (0,0,0): membership by floor(coord / voxel_size).
/// Each occupied voxel yields the centroid of its points, in order of first
/// occurrence in the input.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

}  // namespace pcreg
