#pragma once

#include "pcreg/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pcreg {

struct Neighbor {
  std::size_t index = 0;
  double sq_distance = 0.0;

  /// Distance first, then lowest point index.
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.sq_distance < b.sq_distance ||
           (a.sq_distance == b.sq_distance && a.index < b.index);
  }
  bool operator==(const Neighbor&) const = default;
};

/// Exact k-d tree over a point cloud.
///
/// Results are identical to a brute-force linear scan, including ties, which
/// go to the lowest point index. The index copies the points and is
/// read-only after construction.
class SpatialIndex {
public:
  SpatialIndex() = default;
  explicit SpatialIndex(const PointCloud& cloud);
  explicit SpatialIndex(std::vector<Point3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  /// Up to k neighbors sorted by (distance, index).
  std::vector<Neighbor> knn(const Point3& query, std::size_t k) const;

  /// Nearest neighbor; the index must be nonempty.
  Neighbor nearest(const Point3& query) const;

  /// All points with distance <= radius, sorted by (distance, index).
  std::vector<Neighbor> radius(const Point3& query, double radius) const;

  /// Lower/upper corners of the axis-aligned bounding box.
  const Point3& min_corner() const { return lo_; }
  const Point3& max_corner() const { return hi_; }

private:
  struct Node {
    // Leaves hold [begin, end) of order_; inner nodes split on `axis` at `split`.
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
    std::int8_t axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);
  void knn_search(std::int32_t node, const Point3& q, std::size_t k,
                  std::vector<Neighbor>& heap) const;
  void radius_search(std::int32_t node, const Point3& q, double r2,
                     std::vector<Neighbor>& out) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  Point3 lo_ = Point3::Zero(), hi_ = Point3::Zero();
};

}  // namespace pcreg
