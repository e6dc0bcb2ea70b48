#include "pcreg/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pcreg {

bool priority_before(const Correspondence& a, const Correspondence& b) {
  if (a.is_mnn != b.is_mnn) return a.is_mnn;
  if (a.ratio != b.ratio) return a.ratio > b.ratio;
  if (a.src != b.src) return a.src < b.src;
  return a.dst < b.dst;
}

std::vector<std::size_t> priority_order(std::span<const Correspondence> corrs) {
  std::vector<std::size_t> order(corrs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (priority_before(corrs[a], corrs[b])) return true;
    if (priority_before(corrs[b], corrs[a])) return false;
    return a < b;
  });
  return order;
}

std::vector<Correspondence> sort_by_priority(std::span<const Correspondence> corrs) {
  std::vector<Correspondence> out;
  out.reserve(corrs.size());
  for (std::size_t i : priority_order(corrs)) out.push_back(corrs[i]);
  return out;
}

std::size_t target_count(std::span<const Correspondence> corrs, const GpfConfig& cfg) {
  if (cfg.max_pairs) {
    if (*cfg.max_pairs < 1) throw std::invalid_argument("GPF: absolute pair cap must be >= 1");
    return *cfg.max_pairs;
  }
  if (!(cfg.phi > 0.0) || !std::isfinite(cfg.phi)) {
    throw std::invalid_argument("GPF: phi must be positive");
  }
  const auto mutual = static_cast<std::size_t>(
      std::count_if(corrs.begin(), corrs.end(), [](const auto& c) { return c.is_mnn; }));
  if (mutual == 0) throw NoMutualMatchesError();
  const double r = std::round(cfg.phi * static_cast<double>(mutual));
  return std::max<std::size_t>(1, static_cast<std::size_t>(r));
}

std::size_t quota_search(std::span<const std::size_t> cell_counts, std::size_t target) {
  if (target < 1) throw std::invalid_argument("quota_search: target must be >= 1");
  if (cell_counts.empty()) throw std::invalid_argument("quota_search: no cells");

  const std::size_t max_count = *std::max_element(cell_counts.begin(), cell_counts.end());
  if (max_count <= 1) return 1;

  auto selected = [&](std::size_t l) {
    std::size_t s = 0;
    for (std::size_t c : cell_counts) s += std::min(l, c);
    return s;
  };

  // selected() strictly increases on [1, max_count]; find the first l whose
  // selection reaches the target, then compare with its predecessor.
  std::size_t lo = 1, hi = max_count;
  if (selected(hi) <= target) return hi;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (selected(mid) >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const std::size_t l = lo;
  if (l == 1) return 1;
  const std::size_t over = selected(l) - target;
  const std::size_t under = target - selected(l - 1);
  return over <= under ? l : l - 1;
}

std::vector<std::size_t> grid_assign(const PointCloud& src_cloud,
                                     std::span<const Correspondence> corrs, int grid_m) {
  if (grid_m < 1) throw std::invalid_argument("grid_assign: grid_m must be >= 1");
  std::vector<std::size_t> cells(corrs.size(), 0);
  if (corrs.empty() || grid_m == 1) return cells;

  double min_x = INFINITY, min_y = INFINITY, max_x = -INFINITY, max_y = -INFINITY;
  for (const auto& c : corrs) {
    if (c.src >= src_cloud.size()) {
      throw std::out_of_range("grid_assign: source index " + std::to_string(c.src) +
                              " out of range");
    }
    const Point3& p = src_cloud[c.src];
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }

  const auto m = static_cast<std::size_t>(grid_m);
  auto axis_index = [m](double v, double lo, double hi) -> std::size_t {
    if (!(hi > lo)) return 0;
    // ceil(u*M) - 1 puts interior boundaries in the lower cell; u = 1 lands in
    // the last cell.
    const double u = (v - lo) / (hi - lo) * static_cast<double>(m);
    const double k = std::ceil(u) - 1.0;
    if (k <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(k), m - 1);
  };

  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Point3& p = src_cloud[corrs[i].src];
    cells[i] = axis_index(p.y(), min_y, max_y) * m + axis_index(p.x(), min_x, max_x);
  }
  return cells;
}

std::vector<Correspondence> gpf(const PointCloud& src_cloud,
                                std::span<const Correspondence> corrs, const GpfConfig& cfg) {
  if (corrs.empty()) throw std::invalid_argument("gpf: no correspondences");
  if (cfg.grid_m < 1) throw std::invalid_argument("gpf: grid_m must be >= 1");

  const std::size_t target = target_count(corrs, cfg);
  const std::vector<std::size_t> cell_of = grid_assign(src_cloud, corrs, cfg.grid_m);
  const std::size_t n_cells = static_cast<std::size_t>(cfg.grid_m) * cfg.grid_m;

  std::vector<std::vector<std::size_t>> members(n_cells);
  for (std::size_t i : priority_order(corrs)) members[cell_of[i]].push_back(i);

  std::vector<std::size_t> counts(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) counts[c] = members[c].size();
  const std::size_t quota = quota_search(counts, target);

  std::vector<Correspondence> out;
  out.reserve(std::min(target + n_cells, corrs.size()));
  for (const auto& cell : members) {
    const std::size_t take = std::min(quota, cell.size());
    for (std::size_t k = 0; k < take; ++k) out.push_back(corrs[cell[k]]);
  }
  return out;
}

}  // namespace pcreg
