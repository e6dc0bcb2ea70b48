#pragma once

#include "pcreg/geom.hpp"
#include "pcreg/spatial_index.hpp"

#include <cstddef>
#include <vector>

namespace pcreg {

struct IcpConfig {
  double threshold = 0.6;  // correspondence gate, meters
  std::size_t max_iterations = 30;
  double rmse_delta_tol = 1e-6;
  double transform_delta_tol = 1e-6;

  void validate() const;
};

enum class IcpStatus {
  converged,       // both tolerances met, or a step did not lower the gated RMSE
  max_iterations,  // iteration budget spent
  no_overlap,      // no source point within the gate; input motion returned
  degenerate,      // fewer than 3 gated pairs, or a rank-deficient fit
};

const char* to_string(IcpStatus s);

struct IcpIteration {
  RigidMotion motion;
  double rmse = 0.0;  // gated RMSE of `motion`
  std::size_t pairs = 0;
};

struct IcpResult {
  RigidMotion motion;
  double rmse = 0.0;         // gated RMSE of the returned motion
  double inlier_rmse = 0.0;  // RMSE over the gated pairs only
  double fitness = 0.0;      // gated pairs / source points
  std::size_t iterations = 0;
  IcpStatus status = IcpStatus::max_iterations;
  std::vector<IcpIteration> trace;  // entry 0 is the initial motion
};

/// Gated RMSE: sqrt(mean over all source points of min(d^2, threshold^2)),
/// d the distance from the transformed point to its nearest target point.
/// Unlike the RMSE over surviving pairs it cannot increase under an ICP step.
double gated_rmse(const PointCloud& src, const SpatialIndex& dst, const RigidMotion& motion,
                  double threshold);

/// Point-to-point ICP with a fixed distance gate.
IcpResult icp_refine(const PointCloud& src, const PointCloud& dst, const RigidMotion& init,
                     const IcpConfig& cfg = {});
IcpResult icp_refine(const PointCloud& src, const SpatialIndex& dst, const RigidMotion& init,
                     const IcpConfig& cfg = {});

}  // namespace pcreg
