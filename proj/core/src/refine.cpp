#include "pcreg/refine.hpp"

#include "pcreg/estimate.hpp"

#include <cmath>
#include <stdexcept>

namespace pcreg {
namespace {

struct Pairing {
  std::vector<Point3> src;  // transformed source points within the gate
  std::vector<Point3> dst;
  double truncated_sum = 0.0;
  double gated_sum = 0.0;
};

Pairing pair_up(const PointCloud& src, const SpatialIndex& dst, const RigidMotion& motion,
                double threshold) {
  const double t2 = threshold * threshold;
  Pairing p;
  for (const Point3& x : src.points) {
    const Point3 y = motion.apply(x);
    const Neighbor nn = dst.nearest(y);
    if (nn.sq_distance <= t2) {
      p.src.push_back(y);
      p.dst.push_back(dst.point(nn.index));
      p.gated_sum += nn.sq_distance;
      p.truncated_sum += nn.sq_distance;
    } else {
      p.truncated_sum += t2;
    }
  }
  return p;
}

double update_size(const RigidMotion& step) {
  Eigen::Matrix<double, 3, 4> d;
  d.leftCols<3>() = step.rotation() - Matrix3::Identity();
  d.col(3) = step.translation();
  return d.norm();
}

}  // namespace

void IcpConfig::validate() const {
  if (!(threshold > 0.0)) throw std::invalid_argument("IcpConfig: threshold must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("IcpConfig: max_iterations must be >= 1");
  if (!(rmse_delta_tol >= 0.0) || !(transform_delta_tol >= 0.0)) {
    throw std::invalid_argument("IcpConfig: tolerances must be >= 0");
  }
}

const char* to_string(IcpStatus s) {
  switch (s) {
    case IcpStatus::converged: return "converged";
    case IcpStatus::max_iterations: return "max_iterations";
    case IcpStatus::no_overlap: return "no_overlap";
    case IcpStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

double gated_rmse(const PointCloud& src, const SpatialIndex& dst, const RigidMotion& motion,
                  double threshold) {
  if (src.empty() || dst.empty()) throw std::invalid_argument("gated_rmse: empty cloud");
  return std::sqrt(pair_up(src, dst, motion, threshold).truncated_sum / double(src.size()));
}

IcpResult icp_refine(const PointCloud& src, const PointCloud& dst, const RigidMotion& init,
                     const IcpConfig& cfg) {
  if (dst.empty()) throw std::invalid_argument("icp_refine: empty target cloud");
  return icp_refine(src, SpatialIndex(dst), init, cfg);
}

IcpResult icp_refine(const PointCloud& src, const SpatialIndex& dst, const RigidMotion& init,
                     const IcpConfig& cfg) {
  cfg.validate();
  if (src.empty() || dst.empty()) throw std::invalid_argument("icp_refine: empty cloud");
  if (!init.is_valid(1e-6)) throw std::invalid_argument("icp_refine: invalid initial motion");

  const double n = double(src.size());
  IcpResult result;
  RigidMotion current = init;
  Pairing pairing = pair_up(src, dst, current, cfg.threshold);
  double rmse = std::sqrt(pairing.truncated_sum / n);
  result.trace.push_back({current, rmse, pairing.src.size()});

  if (pairing.src.empty()) {
    result.motion = init;
    result.rmse = rmse;
    result.status = IcpStatus::no_overlap;
    return result;
  }

  RigidMotion best = current;
  Pairing best_pairing = pairing;
  double best_rmse = rmse;
  result.status = IcpStatus::max_iterations;

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    if (pairing.src.size() < 3) {
      result.status = IcpStatus::degenerate;
      break;
    }
    const auto step = kabsch(pairing.src, pairing.dst);
    if (!step) {
      result.status = IcpStatus::degenerate;
      break;
    }
    const RigidMotion candidate = compose(*step, current);
    Pairing next = pair_up(src, dst, candidate, cfg.threshold);
    const double next_rmse = std::sqrt(next.truncated_sum / n);
    // In exact arithmetic a step never raises the gated cost; a rise is
    // rounding at the fixed point.
    if (next_rmse > rmse) {
      result.status = IcpStatus::converged;
      break;
    }
    current = candidate;
    pairing = std::move(next);
    result.iterations = it;
    result.trace.push_back({current, next_rmse, pairing.src.size()});

    if (next_rmse <= best_rmse) {
      best = current;
      best_rmse = next_rmse;
      best_pairing = pairing;
    }
    const bool settled = std::abs(rmse - next_rmse) < cfg.rmse_delta_tol &&
                         update_size(*step) < cfg.transform_delta_tol;
    rmse = next_rmse;
    if (settled) {
      result.status = IcpStatus::converged;
      break;
    }
    if (pairing.src.empty()) {
      result.status = IcpStatus::no_overlap;
      break;
    }
  }

  result.motion = best;
  result.rmse = best_rmse;
  const std::size_t gated = best_pairing.src.size();
  result.fitness = double(gated) / n;
  result.inlier_rmse = gated ? std::sqrt(best_pairing.gated_sum / double(gated)) : 0.0;
  return result;
}

}  // namespace pcreg
