#include "pcreg/geom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

namespace pcreg {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

bool RigidMotion::is_valid(double tol) const {
  if (!rotation_.allFinite() || !translation_.allFinite()) return false;
  const Matrix3 gram = rotation_.transpose() * rotation_;
  if ((gram - Matrix3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation_.determinant() - 1.0) <= tol;
}

RigidMotion compose(const RigidMotion& a, const RigidMotion& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

RigidMotion inverse(const RigidMotion& t) {
  const Matrix3 rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

PointCloud transform(const RigidMotion& t, const PointCloud& cloud) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points) out.push_back(t.apply(p));
  return PointCloud(std::move(out));
}

double max_abs_difference(const RigidMotion& a, const RigidMotion& b) {
  return std::max((a.rotation() - b.rotation()).cwiseAbs().maxCoeff(),
                  (a.translation() - b.translation()).cwiseAbs().maxCoeff());
}

Matrix3 rot_x(double deg) {
  return Eigen::AngleAxisd(deg * kDegToRad, Vector3::UnitX()).toRotationMatrix();
}
Matrix3 rot_y(double deg) {
  return Eigen::AngleAxisd(deg * kDegToRad, Vector3::UnitY()).toRotationMatrix();
}
Matrix3 rot_z(double deg) {
  return Eigen::AngleAxisd(deg * kDegToRad, Vector3::UnitZ()).toRotationMatrix();
}

GimbalLockError::GimbalLockError(double pitch_deg)
    : std::domain_error("rotation is at gimbal lock (pitch " + std::to_string(pitch_deg) +
                        " deg); Z-Y-X angles are not unique"),
      pitch_deg_(pitch_deg) {}

EulerAngles to_euler(const Matrix3& r) {
  const double s = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(s) * kRadToDeg;
  if (std::abs(pitch) >= 90.0 - kGimbalGuardDeg) throw GimbalLockError(pitch);

  EulerAngles e;
  e.pitch = pitch;
  e.yaw = std::atan2(r(1, 0), r(0, 0)) * kRadToDeg;
  e.roll = std::atan2(r(2, 1), r(2, 2)) * kRadToDeg;
  // Half-open ranges (-180, 180].
  if (e.yaw <= -180.0) e.yaw += 360.0;
  if (e.roll <= -180.0) e.roll += 360.0;
  return e;
}

Matrix3 from_euler(const EulerAngles& e) {
  return rot_z(e.yaw) * rot_y(e.pitch) * rot_x(e.roll);
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw std::invalid_argument("voxel_downsample: voxel_size must be positive and finite");
  }

  struct Accum {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    std::size_t count = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot_of;
  std::vector<Accum> slots;
  std::vector<VoxelKey> keys;
  slot_of.reserve(cloud.size());

  for (const auto& p : cloud.points) {
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
                       static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
                       static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
    auto [it, inserted] = slot_of.try_emplace(key, slots.size());
    if (inserted) {
      slots.emplace_back();
      keys.push_back(key);
    }
    auto& acc = slots[it->second];
    acc.sum += p;
    ++acc.count;
  }

  std::vector<Point3> out;
  out.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    Point3 c = slots[i].sum / static_cast<double>(slots[i].count);
    // Rounding can push a centroid a few ulps across its voxel boundary.
    const std::int64_t k[3] = {keys[i].x, keys[i].y, keys[i].z};
    for (int axis = 0; axis < 3; ++axis) {
      while (static_cast<std::int64_t>(std::floor(c[axis] / voxel_size)) < k[axis])
        c[axis] = std::nextafter(c[axis], std::numeric_limits<double>::infinity());
      while (static_cast<std::int64_t>(std::floor(c[axis] / voxel_size)) > k[axis])
        c[axis] = std::nextafter(c[axis], -std::numeric_limits<double>::infinity());
    }
    out.push_back(c);
  }
  return PointCloud(std::move(out));
}

}  // namespace pcreg
