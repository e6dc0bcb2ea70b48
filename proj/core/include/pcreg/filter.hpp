#pragma once

#include "pcreg/geom.hpp"
#include "pcreg/match.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pcreg {

/// Grid-Prioritized Filtering parameters.
struct GpfConfig {
  int grid_m = 10;                          // cells per side of the x-y grid
  double phi = 2.0;                         // target = phi * |MNN|
  std::optional<std::size_t> max_pairs;     // absolute target; overrides phi
};

/// Quality order used by GPF and PROSAC: mutual matches first, then larger
/// 1st/2nd distance ratio, then ascending source index (ascending target index
/// as a final tie-break for inputs with repeated sources).
bool priority_before(const Correspondence& a, const Correspondence& b);

/// Indices of `corrs` sorted best-first by priority_before.
std::vector<std::size_t> priority_order(std::span<const Correspondence> corrs);

/// Copy of `corrs` sorted best-first.
std::vector<Correspondence> sort_by_priority(std::span<const Correspondence> corrs);

/// Raised when the GPF target is defined by phi but no mutual matches exist.
class NoMutualMatchesError : public std::runtime_error {
public:
  NoMutualMatchesError()
      : std::runtime_error("GPF: no mutual nearest neighbors and no absolute pair cap") {}
};

/// R = max(1, round(phi * #mutual)), or cfg.max_pairs when set.
std::size_t target_count(std::span<const Correspondence> corrs, const GpfConfig& cfg);

/// Per-cell quota l in [1, max count] minimizing |sum_i min(l, c_i) - R|,
/// ties toward larger l. Binary search over the increasing selection curve.
std::size_t quota_search(std::span<const std::size_t> cell_counts, std::size_t target);

/// Cell id (iy * grid_m + ix) of each correspondence's source point, on a grid
/// spanning the x-y bounding box of the referenced source points. A point on
/// an interior cell boundary goes to the lower-index cell; a degenerate axis
/// maps to index 0.
std::vector<std::size_t> grid_assign(const PointCloud& src_cloud,
                                     std::span<const Correspondence> corrs, int grid_m);

/// GPF selection: the top-l matches of every cell by priority, concatenated
/// in ascending cell id, each cell best-first.
std::vector<Correspondence> gpf(const PointCloud& src_cloud,
                                std::span<const Correspondence> corrs, const GpfConfig& cfg);

}  // namespace pcreg
