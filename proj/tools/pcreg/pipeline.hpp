#pragma once

#include <pcreg/estimate.hpp>
#include <pcreg/filter.hpp>
#include <pcreg/match.hpp>
#include <pcreg/refine.hpp>

#include <optional>

namespace pcreg::cli {

enum class FilterKind { none, mnn, gpf };

struct PipelineConfig {
  FilterKind filter = FilterKind::gpf;
  GpfConfig gpf;
  RansacConfig ransac;
  bool refine = false;
  IcpConfig icp;
};

struct PipelineResult {
  RegistrationResult coarse;
  std::optional<IcpResult> refined;
  RigidMotion motion;  // refined when refinement ran, else coarse
  std::size_t n_corrs = 0;
  std::size_t n_filtered = 0;
  bool gpf_fallback = false;  // GPF had no mutual matches; all matches were kept
  double coarse_time = 0.0;   // matching + filtering + RANSAC, seconds
  double total_time = 0.0;    // coarse_time + ICP
};

/// Matching, filtering, RANSAC and optional ICP for one pair. With fewer than
/// three filtered matches the coarse stage reports no model and the identity.
PipelineResult run_pipeline(const PointCloud& src, const PointCloud& dst,
                            const DescriptorSet& src_desc, const DescriptorSet& dst_desc,
                            const PipelineConfig& cfg);

}  // namespace pcreg::cli
