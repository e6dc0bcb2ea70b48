#pragma once

#include "pcreg/benchgen.hpp"
#include "pcreg/geom.hpp"
#include "pcreg/match.hpp"
#include "pcreg/random.hpp"

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcreg {

class InfeasibleSpecError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct SceneSpec {
  std::size_t n_points = 1000;
  double extent = 50.0;  // half-width of the source bounding box, meters
  RigidMotion true_motion;
  double inlier_fraction = 0.5;
  double noise_sigma = 0.05;
  double outlier_min_offset = 1.0;  // outlier target distance from the true mapping
  std::size_t descriptor_dim = 32;
  double quality_correlation = 0.5;  // 0: scores ignore labels; 1: scores separate them
  // When > 0, outlier source points are confined to this many balls of
  // radius outlier_cluster_radius instead of the whole box.
  std::size_t outlier_clusters = 0;
  double outlier_cluster_radius = 5.0;
  std::uint64_t seed = 0;

  /// Throws InfeasibleSpecError.
  void validate() const;
};

/// Synthetic correspondence problem with planted labels.
///
/// dst[k] = true_motion(src[k]) + noise for every k, the noise Gaussian with
/// per-axis sigma and truncated at norm 3 sigma. Source point i is
/// either an inlier, whose descriptor matches dst[i], or an outlier, whose
/// descriptor matches a random dst[j] at least outlier_min_offset from the
/// true mapping of src[i]. Descriptors are built so that match_features
/// returns exactly the planted list.
struct Scene {
  PointCloud src, dst;
  DescriptorSet src_desc, dst_desc;
  std::vector<Correspondence> corrs;  // match_features output; corrs[i].src == i
  std::vector<bool> is_inlier;        // per correspondence
  std::size_t inlier_count = 0;
  RigidMotion true_motion;
};

Scene generate_scene(const SceneSpec& spec);

/// Random rotation with geodesic angle <= max_angle_deg (uniform axis and
/// angle) plus a translation uniform in [-max_translation, max_translation]^3.
RigidMotion random_motion(Rng& rng, double max_angle_deg, double max_translation);

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

enum class TrajectoryModel { stationary, straight, uturn, drive };

struct TrajectorySpec {
  std::string sequence_id = "seq";
  TrajectoryModel model = TrajectoryModel::drive;
  std::size_t n_frames = 100;
  double frame_spacing = 2.0;    // meters travelled per frame
  double frame_dt = 0.5;         // seconds per frame
  double turn_radius = 10.0;     // uturn
  double max_yaw_rate = 5.0;     // degrees per frame, drive
  double attitude_sigma = 0.5;   // roll/pitch standard deviation, degrees
  double sensor_range = 50.0;    // horizontal, meters
  double point_density = 0.2;    // world points per square meter
  double z_jitter = 2.0;         // world points uniform in [-z_jitter, z_jitter]
  std::uint64_t seed = 0;

  void validate() const;
};

struct Trajectory {
  Sequence sequence;                // poses, timestamps and sensor-frame clouds
  std::vector<Point3> world;        // the shared world point set
};

/// Vehicle-like path over a fixed world point set. Frame clouds hold the world
/// points within sensor_range (2-D) of the sensor, in sensor coordinates, so
/// overlaps between frames follow from the geometry. The stationary model has
/// identical poses and zero attitude noise.
Trajectory generate_trajectory(const TrajectorySpec& spec);

/// Area fraction of a range disk covered by another disk of the same radius
/// whose center is `distance` away.
double disk_overlap_fraction(double distance, double radius);

}  // namespace pcreg
