#include "pcreg/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pcreg {
namespace {

constexpr std::uint32_t kLeafSize = 12;

}  // namespace

SpatialIndex::SpatialIndex(const PointCloud& cloud) : SpatialIndex(cloud.points) {}

SpatialIndex::SpatialIndex(std::vector<Point3> points) : points_(std::move(points)) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("SpatialIndex: too many points");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    lo_ = hi_ = points_.front();
    for (const auto& p : points_) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points_.size()), 0);
  }
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];

  nodes_[id].axis = static_cast<std::int8_t>(axis);
  nodes_[id].split = split;
  // After nth_element: left coordinates <= split <= right coordinates.
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void SpatialIndex::knn_search(std::int32_t node_id, const Point3& q, std::size_t k,
                              std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const Neighbor cand{idx, (points_[idx] - q).squaredNorm()};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near_child = diff <= 0.0 ? node.left : node.right;
  const std::int32_t far_child = diff <= 0.0 ? node.right : node.left;
  knn_search(near_child, q, k, heap);
  // Equal distance must still be explored: a tie may carry a lower index.
  if (heap.size() < k || diff * diff <= heap.front().sq_distance) {
    knn_search(far_child, q, k, heap);
  }
}

std::vector<Neighbor> SpatialIndex::knn(const Point3& query, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0 || points_.empty()) return heap;
  heap.reserve(k);
  knn_search(0, query, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

Neighbor SpatialIndex::nearest(const Point3& query) const {
  if (points_.empty()) throw std::logic_error("SpatialIndex::nearest on empty index");
  return knn(query, 1).front();
}

void SpatialIndex::radius_search(std::int32_t node_id, const Point3& q, double r2,
                                 std::vector<Neighbor>& out) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 <= r2) out.push_back({idx, d2});
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near_child = diff <= 0.0 ? node.left : node.right;
  const std::int32_t far_child = diff <= 0.0 ? node.right : node.left;
  radius_search(near_child, q, r2, out);
  if (diff * diff <= r2) radius_search(far_child, q, r2, out);
}

std::vector<Neighbor> SpatialIndex::radius(const Point3& query, double radius) const {
  std::vector<Neighbor> out;
  if (points_.empty() || !(radius >= 0.0)) return out;
  radius_search(0, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pcreg
