#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace pcreg {

/// One descriptor row per point, float32 as stored on disk.
class DescriptorSet {
public:
  using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  DescriptorSet() = default;
  /// Throws std::invalid_argument on an empty matrix or non-finite entries.
  explicit DescriptorSet(Matrix rows);

  std::size_t count() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }
  std::span<const float> row(std::size_t i) const {
    return {rows_.data() + i * dim(), dim()};
  }
  const Matrix& matrix() const { return rows_; }

  bool operator==(const DescriptorSet& o) const {
    return rows_.rows() == o.rows_.rows() && rows_.cols() == o.rows_.cols() && rows_ == o.rows_;
  }

private:
  Matrix rows_;
};

/// A putative source->target match.
struct Correspondence {
  std::size_t src = 0;
  std::size_t dst = 0;
  double feat_dist = 0.0;  // d(p, q1)
  double ratio = 1.0;      // d(p, q2) / d(p, q1)
  bool is_mnn = false;

  bool operator==(const Correspondence&) const = default;
};

/// Euclidean distance between two descriptor rows. Throws on dim mismatch.
double feat_dist_exact(std::span<const float> p, std::span<const float> q);

/// Exact feature-space nearest neighbors, one Correspondence per source row,
/// in source order. Ties go to the lowest target index. When the two nearest
/// distances are both zero the ratio is 1; when only the first is zero it is
/// +infinity.
///
/// Throws std::invalid_argument when dims differ or either set has fewer than
/// two rows.
std::vector<Correspondence> match_features(const DescriptorSet& src, const DescriptorSet& dst);

/// The mutual-nearest-neighbor subset, input order preserved.
std::vector<Correspondence> mnn_filter(std::span<const Correspondence> corrs);

}  // namespace pcreg
