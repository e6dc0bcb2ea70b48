#include "pcreg/match.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pcreg {
namespace {

// Four interleaved accumulators, always combined in the same order.
inline double sq_dist(const float* a, const float* b, std::size_t dim) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= dim; i += 4) {
    const double d0 = double(a[i]) - double(b[i]);
    const double d1 = double(a[i + 1]) - double(b[i + 1]);
    const double d2 = double(a[i + 2]) - double(b[i + 2]);
    const double d3 = double(a[i + 3]) - double(b[i + 3]);
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < dim; ++i) {
    const double d = double(a[i]) - double(b[i]);
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

DescriptorSet::DescriptorSet(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1 || rows_.cols() < 1) {
    throw std::invalid_argument("DescriptorSet: count and dim must be >= 1");
  }
  if (!rows_.allFinite()) {
    throw std::invalid_argument("DescriptorSet: non-finite descriptor entry");
  }
}

double feat_dist_exact(std::span<const float> p, std::span<const float> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("feat_dist_exact: dimension mismatch (" +
                                std::to_string(p.size()) + " vs " + std::to_string(q.size()) +
                                ")");
  }
  return std::sqrt(sq_dist(p.data(), q.data(), p.size()));
}

std::vector<Correspondence> match_features(const DescriptorSet& src, const DescriptorSet& dst) {
  if (src.dim() != dst.dim()) {
    throw std::invalid_argument("match_features: descriptor dimension mismatch (" +
                                std::to_string(src.dim()) + " vs " + std::to_string(dst.dim()) +
                                ")");
  }
  if (src.count() < 2 || dst.count() < 2) {
    throw std::invalid_argument("match_features: both descriptor sets need at least 2 rows");
  }

  const std::size_t n_src = src.count();
  const std::size_t n_dst = dst.count();
  const std::size_t dim = src.dim();
  const float* src_data = src.matrix().data();
  const float* dst_data = dst.matrix().data();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Reverse map for the reciprocity check: nearest source row per target row.
  std::vector<double> col_best(n_dst, kInf);
  std::vector<std::size_t> col_arg(n_dst, 0);

  std::vector<Correspondence> out(n_src);
  for (std::size_t i = 0; i < n_src; ++i) {
    const float* p = src_data + i * dim;
    double d1 = kInf, d2 = kInf;
    std::size_t j1 = 0;
    for (std::size_t j = 0; j < n_dst; ++j) {
      const double d = sq_dist(p, dst_data + j * dim, dim);
      // Strict comparisons keep the lowest index on ties.
      if (d < d1) {
        d2 = d1;
        d1 = d;
        j1 = j;
      } else if (d < d2) {
        d2 = d;
      }
      if (d < col_best[j]) {
        col_best[j] = d;
        col_arg[j] = i;
      }
    }
    Correspondence& c = out[i];
    c.src = i;
    c.dst = j1;
    c.feat_dist = std::sqrt(d1);
    const double second = std::sqrt(d2);
    if (c.feat_dist > 0.0) {
      c.ratio = second / c.feat_dist;
    } else {
      c.ratio = second > 0.0 ? kInf : 1.0;
    }
  }
  for (auto& c : out) c.is_mnn = col_arg[c.dst] == c.src;
  return out;
}

std::vector<Correspondence> mnn_filter(std::span<const Correspondence> corrs) {
  std::vector<Correspondence> out;
  out.reserve(corrs.size());
  for (const auto& c : corrs) {
    if (c.is_mnn) out.push_back(c);
  }
  return out;
}

}  // namespace pcreg
