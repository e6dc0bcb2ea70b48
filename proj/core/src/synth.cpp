#include "pcreg/synth.hpp"

#include "pcreg/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pcreg {
namespace {

// Descriptor noise norms at quality_correlation 0 (kMid) and 1 (kLow for
// inliers, kHigh for outliers). Base rows are standard normal, so distinct
// rows sit about sqrt(2 * dim) apart.
constexpr double kLowNoise = 0.5;
constexpr double kMidNoise = 2.0;
constexpr double kHighNoise = 3.5;
constexpr double kNoiseJitter = 0.2;  // relative, uniform
constexpr int kMaxResampleRounds = 200;

double lerp(double a, double b, double t) { return a + (b - a) * t; }

Vector3 random_unit(Rng& rng) {
  Vector3 v;
  do {
    v = Vector3(rng.normal(), rng.normal(), rng.normal());
  } while (v.squaredNorm() < 1e-12);
  return v.normalized();
}

void add_noise_of_norm(Rng& rng, const float* base, float* out, std::size_t dim, double norm) {
  std::vector<double> dir(dim);
  double s = 0.0;
  do {
    s = 0.0;
    for (double& d : dir) {
      d = rng.normal();
      s += d * d;
    }
  } while (s < 1e-12);
  const double scale = norm / std::sqrt(s);
  for (std::size_t k = 0; k < dim; ++k) out[k] = float(double(base[k]) + scale * dir[k]);
}

/// Nearest target row of a source row, with the same arithmetic and tie rule
/// as match_features.
std::size_t nearest_row(std::span<const float> row, const DescriptorSet& dst) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t j = 0; j < dst.count(); ++j) {
    const double d = feat_dist_exact(row, dst.row(j));
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

}  // namespace

void SceneSpec::validate() const {
  if (!(extent > 0.0)) throw InfeasibleSpecError("scene: extent must be > 0");
  if (!(inlier_fraction >= 0.0 && inlier_fraction <= 1.0)) {
    throw InfeasibleSpecError("scene: inlier_fraction must be in [0, 1]");
  }
  if (std::llround(inlier_fraction * double(n_points)) < 3) {
    throw InfeasibleSpecError("scene: fewer than 3 inliers");
  }
  if (!(noise_sigma >= 0.0)) throw InfeasibleSpecError("scene: noise_sigma must be >= 0");
  if (!(outlier_min_offset > 2.0 * noise_sigma)) {
    throw InfeasibleSpecError("scene: outlier_min_offset must exceed 2 * noise_sigma");
  }
  if (descriptor_dim < 1) throw InfeasibleSpecError("scene: descriptor_dim must be >= 1");
  if (!(quality_correlation >= 0.0 && quality_correlation <= 1.0)) {
    throw InfeasibleSpecError("scene: quality_correlation must be in [0, 1]");
  }
  if (outlier_clusters > 0 && !(outlier_cluster_radius > 0.0)) {
    throw InfeasibleSpecError("scene: outlier_cluster_radius must be > 0");
  }
  if (!true_motion.is_valid(1e-6)) throw InfeasibleSpecError("scene: invalid true_motion");
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_points;
  const std::size_t dim = spec.descriptor_dim;
  const auto n_in = static_cast<std::size_t>(std::llround(spec.inlier_fraction * double(n)));

  Rng rng(spec.seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  std::vector<bool> inlier(n, false);
  for (std::size_t k = 0; k < n_in; ++k) inlier[perm[k]] = true;

  std::vector<Point3> centers;
  for (std::size_t c = 0; c < spec.outlier_clusters; ++c) {
    centers.emplace_back(rng.uniform(-spec.extent, spec.extent),
                         rng.uniform(-spec.extent, spec.extent),
                         rng.uniform(-spec.extent, spec.extent));
  }

  Scene scene;
  scene.true_motion = spec.true_motion;
  scene.src.points.resize(n);
  scene.dst.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point3 p;
    if (!inlier[i] && !centers.empty()) {
      // Uniform in a ball around one of the cluster centers.
      const Point3& c = centers[rng.index(centers.size())];
      p = c + random_unit(rng) * spec.outlier_cluster_radius * std::cbrt(rng.uniform01());
    } else {
      p = Point3(rng.uniform(-spec.extent, spec.extent), rng.uniform(-spec.extent, spec.extent),
                 rng.uniform(-spec.extent, spec.extent));
    }
    scene.src.points[i] = p;
  }
  // Gaussian noise truncated at norm 3 sigma, so a 3-sigma gate separates
  // the planted labels exactly.
  for (std::size_t i = 0; i < n; ++i) {
    Point3 noise;
    do {
      noise = Point3(rng.normal(), rng.normal(), rng.normal());
    } while (noise.squaredNorm() > 9.0);
    scene.dst.points[i] = spec.true_motion.apply(scene.src[i]) + spec.noise_sigma * noise;
  }

  std::vector<std::size_t> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (inlier[i]) {
      target[i] = i;
      continue;
    }
    const Point3 mapped = spec.true_motion.apply(scene.src[i]);
    const double min2 = spec.outlier_min_offset * spec.outlier_min_offset;
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      const std::size_t j = rng.index(n);
      if ((scene.dst[j] - mapped).squaredNorm() >= min2) {
        target[i] = j;
        found = true;
      }
    }
    if (!found) throw InfeasibleSpecError("scene: no outlier target far enough from the truth");
  }

  DescriptorSet::Matrix dst_rows(n, dim);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < dim; ++k) dst_rows(j, k) = float(rng.normal());
  }
  scene.dst_desc = DescriptorSet(std::move(dst_rows));

  const double c = spec.quality_correlation;
  const double a_in = lerp(kMidNoise, kLowNoise, c);
  const double a_out = lerp(kMidNoise, kHighNoise, c);
  std::vector<double> noise_norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    noise_norm[i] = (inlier[i] ? a_in : a_out) * rng.uniform(1.0 - kNoiseJitter, 1.0 + kNoiseJitter);
  }

  DescriptorSet::Matrix src_rows(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    add_noise_of_norm(rng, scene.dst_desc.row(target[i]).data(), src_rows.row(i).data(), dim,
                      noise_norm[i]);
  }

  // Redraw the noise direction of any row whose nearest target row is not
  // the planted one.
  std::vector<std::size_t> wrong;
  auto row_of = [&](std::size_t i) {
    return std::span<const float>(src_rows.row(i).data(), dim);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (nearest_row(row_of(i), scene.dst_desc) != target[i]) wrong.push_back(i);
  }
  for (int round = 0; !wrong.empty(); ++round) {
    if (round == kMaxResampleRounds) {
      throw InfeasibleSpecError("scene: could not plant descriptor matches; raise descriptor_dim");
    }
    std::vector<std::size_t> still;
    for (std::size_t i : wrong) {
      add_noise_of_norm(rng, scene.dst_desc.row(target[i]).data(), src_rows.row(i).data(), dim,
                        noise_norm[i]);
      if (nearest_row(row_of(i), scene.dst_desc) != target[i]) still.push_back(i);
    }
    wrong.swap(still);
  }
  scene.src_desc = DescriptorSet(std::move(src_rows));

  scene.corrs = match_features(scene.src_desc, scene.dst_desc);
  scene.is_inlier.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (scene.corrs[i].dst != target[i]) {
      throw std::logic_error("generate_scene: planted match not reproduced");
    }
    scene.is_inlier[i] = inlier[i];
  }
  scene.inlier_count = n_in;
  return scene;
}

RigidMotion random_motion(Rng& rng, double max_angle_deg, double max_translation) {
  const Vector3 axis = random_unit(rng);
  const double angle = rng.uniform(0.0, max_angle_deg) * std::numbers::pi / 180.0;
  const Matrix3 r = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  const Vector3 t(rng.uniform(-max_translation, max_translation),
                  rng.uniform(-max_translation, max_translation),
                  rng.uniform(-max_translation, max_translation));
  return {r, t};
}

// ---------------------------------------------------------------------------

void TrajectorySpec::validate() const {
  if (n_frames < 2) throw InfeasibleSpecError("trajectory: need at least 2 frames");
  if (!(frame_spacing >= 0.0)) throw InfeasibleSpecError("trajectory: frame_spacing < 0");
  if (!(frame_dt > 0.0)) throw InfeasibleSpecError("trajectory: frame_dt must be > 0");
  if (!(turn_radius > 0.0)) throw InfeasibleSpecError("trajectory: turn_radius must be > 0");
  if (!(max_yaw_rate >= 0.0)) throw InfeasibleSpecError("trajectory: max_yaw_rate < 0");
  if (!(attitude_sigma >= 0.0)) throw InfeasibleSpecError("trajectory: attitude_sigma < 0");
  if (!(sensor_range > 0.0)) throw InfeasibleSpecError("trajectory: sensor_range must be > 0");
  if (!(point_density > 0.0)) throw InfeasibleSpecError("trajectory: point_density must be > 0");
  if (!(z_jitter >= 0.0)) throw InfeasibleSpecError("trajectory: z_jitter < 0");
}

Trajectory generate_trajectory(const TrajectorySpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double deg = 180.0 / std::numbers::pi;

  struct State {
    double x, y, yaw;  // yaw in degrees
  };
  std::vector<State> path(spec.n_frames);
  const double total = double(spec.n_frames - 1) * spec.frame_spacing;

  switch (spec.model) {
    case TrajectoryModel::stationary:
      for (auto& s : path) s = {0.0, 0.0, 0.0};
      break;
    case TrajectoryModel::straight:
      for (std::size_t i = 0; i < path.size(); ++i) {
        path[i] = {double(i) * spec.frame_spacing, 0.0, 0.0};
      }
      break;
    case TrajectoryModel::uturn: {
      const double r = spec.turn_radius;
      const double arc = std::numbers::pi * r;
      const double leg = std::max(0.0, (total - arc) / 2.0);
      for (std::size_t i = 0; i < path.size(); ++i) {
        const double s = double(i) * spec.frame_spacing;
        if (s < leg) {
          path[i] = {s, 0.0, 0.0};
        } else if (s < leg + arc) {
          const double phi = (s - leg) / r;
          path[i] = {leg + r * std::sin(phi), r - r * std::cos(phi), phi * deg};
        } else {
          path[i] = {leg - (s - leg - arc), 2.0 * r, 180.0};
        }
      }
      break;
    }
    case TrajectoryModel::drive: {
      double x = 0.0, y = 0.0, yaw = rng.uniform(-180.0, 180.0), rate = 0.0;
      for (auto& s : path) {
        s = {x, y, yaw};
        rate = std::clamp(rate + rng.normal(0.0, spec.max_yaw_rate / 3.0), -spec.max_yaw_rate,
                          spec.max_yaw_rate);
        yaw += rate;
        x += spec.frame_spacing * std::cos(yaw / deg);
        y += spec.frame_spacing * std::sin(yaw / deg);
      }
      break;
    }
  }

  // World points over the area the sensor can see anywhere along the path.
  double min_x = INFINITY, max_x = -INFINITY, min_y = INFINITY, max_y = -INFINITY;
  for (const auto& s : path) {
    min_x = std::min(min_x, s.x);
    max_x = std::max(max_x, s.x);
    min_y = std::min(min_y, s.y);
    max_y = std::max(max_y, s.y);
  }
  const double margin = spec.sensor_range + 1.0;
  min_x -= margin;
  max_x += margin;
  min_y -= margin;
  max_y += margin;
  const auto n_world =
      static_cast<std::size_t>(std::llround(spec.point_density * (max_x - min_x) * (max_y - min_y)));

  Trajectory out;
  out.world.reserve(n_world);
  for (std::size_t k = 0; k < n_world; ++k) {
    out.world.emplace_back(rng.uniform(min_x, max_x), rng.uniform(min_y, max_y),
                           rng.uniform(-spec.z_jitter, spec.z_jitter));
  }

  out.sequence.id = spec.sequence_id;
  const bool still = spec.model == TrajectoryModel::stationary;
  const double r2 = spec.sensor_range * spec.sensor_range;
  for (std::size_t i = 0; i < path.size(); ++i) {
    EulerAngles e;
    e.yaw = path[i].yaw;
    if (!still) {
      e.roll = rng.normal(0.0, spec.attitude_sigma);
      e.pitch = rng.normal(0.0, spec.attitude_sigma);
    }
    // Wrap into (-180, 180].
    e.yaw = std::remainder(e.yaw, 360.0);
    if (e.yaw <= -180.0) e.yaw += 360.0;

    PosedFrame f;
    f.frame_index = i;
    f.timestamp = double(i) * spec.frame_dt;
    f.pose = RigidMotion(from_euler(e), Vector3(path[i].x, path[i].y, 0.0));

    const RigidMotion world_to_sensor = inverse(f.pose);
    auto cloud = std::make_shared<PointCloud>();
    for (const Point3& w : out.world) {
      const double dx = w.x() - path[i].x, dy = w.y() - path[i].y;
      if (dx * dx + dy * dy <= r2) cloud->points.push_back(world_to_sensor.apply(w));
    }
    f.cloud = std::move(cloud);
    out.sequence.frames.push_back(std::move(f));
  }
  return out;
}

double disk_overlap_fraction(double distance, double radius) {
  const double d = std::abs(distance);
  if (d >= 2.0 * radius) return 0.0;
  const double r = radius;
  const double lens = 2.0 * r * r * std::acos(d / (2.0 * r)) - 0.5 * d * std::sqrt(4.0 * r * r - d * d);
  return lens / (std::numbers::pi * r * r);
}

}  // namespace pcreg
