#include "pcreg/pipeline.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace pcreg::cli {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PipelineResult run_pipeline(const PointCloud& src, const PointCloud& dst,
                            const DescriptorSet& src_desc, const DescriptorSet& dst_desc,
                            const PipelineConfig& cfg) {
  if (src_desc.count() != src.size() || dst_desc.count() != dst.size()) {
    throw std::invalid_argument("descriptor count does not match cloud size (" +
                                std::to_string(src_desc.count()) + "/" +
                                std::to_string(src.size()) + ", " +
                                std::to_string(dst_desc.count()) + "/" +
                                std::to_string(dst.size()) + ")");
  }
  PipelineResult out;
  const auto t0 = std::chrono::steady_clock::now();

  const std::vector<Correspondence> all = match_features(src_desc, dst_desc);
  out.n_corrs = all.size();
  std::vector<Correspondence> kept;
  switch (cfg.filter) {
    case FilterKind::none:
      kept = all;
      break;
    case FilterKind::mnn:
      kept = mnn_filter(all);
      break;
    case FilterKind::gpf:
      try {
        kept = gpf(src, all, cfg.gpf);
      } catch (const NoMutualMatchesError&) {
        kept = all;
        out.gpf_fallback = true;
      }
      break;
  }
  out.n_filtered = kept.size();

  if (kept.size() >= 3) {
    out.coarse = ransac_register(src, dst, kept, cfg.ransac);
  } else {
    out.coarse.inlier_mask.assign(kept.size(), false);
  }
  out.motion = out.coarse.motion;
  out.coarse_time = seconds_since(t0);

  if (cfg.refine) {
    const auto t1 = std::chrono::steady_clock::now();
    out.refined = icp_refine(src, dst, out.coarse.motion, cfg.icp);
    out.motion = out.refined->motion;
    out.total_time = out.coarse_time + seconds_since(t1);
  } else {
    out.total_time = out.coarse_time;
  }
  return out;
}

}  // namespace pcreg::cli
