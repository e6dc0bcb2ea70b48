#include <pcreg/benchgen.hpp>
#include <pcreg/estimate.hpp>
#include <pcreg/filter.hpp>
#include <pcreg/synth.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

namespace pcreg {
namespace {

SceneSpec base_spec(std::uint64_t seed) {
  Rng rng(seed);
  SceneSpec s;
  s.true_motion = random_motion(rng, 180, 10);
  s.seed = seed;
  return s;
}

TEST(Scene, ExactInlierCount) {
  auto s = base_spec(101);
  s.inlier_fraction = 0.3;
  const Scene sc = generate_scene(s);
  EXPECT_EQ(sc.inlier_count, 300u);
  EXPECT_EQ(std::count(sc.is_inlier.begin(), sc.is_inlier.end(), true), 300);
  EXPECT_EQ(sc.src.size(), 1000u);
  EXPECT_EQ(sc.dst.size(), 1000u);
  EXPECT_EQ(sc.src_desc.count(), 1000u);
  EXPECT_EQ(sc.dst_desc.dim(), 32u);
}

TEST(Scene, NoiselessAllInliersKabschExact) {
  auto s = base_spec(102);
  s.inlier_fraction = 1.0;
  s.noise_sigma = 0.0;
  const Scene sc = generate_scene(s);
  Rng rng(102);
  for (int k = 0; k < 20; ++k) {
    const auto idx = uniform_sample(sc.corrs.size(), rng);
    std::vector<Point3> p, q;
    for (auto i : idx) {
      p.push_back(sc.src[sc.corrs[i].src]);
      q.push_back(sc.dst[sc.corrs[i].dst]);
    }
    const auto m = kabsch(p, q);
    ASSERT_TRUE(m);
    EXPECT_LT(max_abs_difference(*m, s.true_motion), 1e-9);
  }
}

TEST(Scene, CorrespondencesAreMatcherOutput) {
  auto s = base_spec(103);
  s.n_points = 400;
  const Scene sc = generate_scene(s);
  EXPECT_EQ(match_features(sc.src_desc, sc.dst_desc), sc.corrs);
  for (std::size_t i = 0; i < sc.corrs.size(); ++i) {
    EXPECT_EQ(sc.corrs[i].src, i);
    if (sc.is_inlier[i]) EXPECT_EQ(sc.corrs[i].dst, i);
    if (!sc.is_inlier[i]) {
      EXPECT_GE((sc.dst[sc.corrs[i].dst] - sc.true_motion.apply(sc.src[i])).norm(), s.outlier_min_offset);
    }
  }
}

TEST(Scene, PerfectQualitySeparatesLabelsByRatio) {
  auto s = base_spec(104);
  s.quality_correlation = 1.0;
  const Scene sc = generate_scene(s);
  double min_in = INFINITY, max_out = -INFINITY;
  for (std::size_t i = 0; i < sc.corrs.size(); ++i) {
    if (sc.is_inlier[i]) {
      min_in = std::min(min_in, sc.corrs[i].ratio);
    } else {
      max_out = std::max(max_out, sc.corrs[i].ratio);
    }
  }
  EXPECT_GT(min_in, max_out);
}

TEST(Scene, PlantedLabelConsistency) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = base_spec(200 + seed);
    s.noise_sigma = 0.1;
    s.outlier_min_offset = 0.5;
    s.inlier_fraction = 0.4;
    if (seed % 2) {
      s.outlier_clusters = 3;
    }
    const Scene sc = generate_scene(s);
    const auto in = count_inliers(sc.true_motion, sc.corrs, sc.src, sc.dst, 3 * s.noise_sigma + 1e-9);
    EXPECT_EQ(in.mask, sc.is_inlier);
  }
}

TEST(Scene, Deterministic) {
  const auto s = base_spec(105);
  const Scene a = generate_scene(s), b = generate_scene(s);
  EXPECT_EQ(a.src.points, b.src.points);
  EXPECT_EQ(a.dst.points, b.dst.points);
  EXPECT_EQ(a.src_desc, b.src_desc);
  EXPECT_EQ(a.dst_desc, b.dst_desc);
  EXPECT_EQ(a.corrs, b.corrs);
  auto s2 = s;
  s2.seed += 1;
  EXPECT_NE(generate_scene(s2).src.points, a.src.points);
}

TEST(Scene, InfeasibleSpecs) {
  SceneSpec s;
  s.n_points = 10;
  s.inlier_fraction = 0.2;  // 2 inliers
  EXPECT_THROW(generate_scene(s), InfeasibleSpecError);
  s = {};
  s.noise_sigma = 1.0;
  s.outlier_min_offset = 1.5;
  EXPECT_THROW(generate_scene(s), InfeasibleSpecError);
  s = {};
  s.inlier_fraction = 1.5;
  EXPECT_THROW(generate_scene(s), InfeasibleSpecError);
}

TEST(RandomMotion, Bounds) {
  Rng rng(106);
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_motion(rng, 30, 2);
    EXPECT_TRUE(m.is_valid());
    EXPECT_LE(oracle::quaternion_angle_deg(m.rotation(), Matrix3::Identity()), 30 + 1e-9);
    EXPECT_LE(m.translation().cwiseAbs().maxCoeff(), 2.0);
  }
}

TEST(Trajectory, StationaryIsIdentityWithFullOverlap) {
  TrajectorySpec t;
  t.model = TrajectoryModel::stationary;
  t.n_frames = 5;
  t.seed = 107;
  const auto tr = generate_trajectory(t);
  ASSERT_EQ(tr.sequence.frames.size(), 5u);
  for (const auto& f : tr.sequence.frames) {
    EXPECT_EQ(max_abs_difference(registration_gt(tr.sequence.frames[0].pose, f.pose), RigidMotion::identity()), 0.0);
    EXPECT_EQ(overlap(*tr.sequence.frames[0].cloud, *f.cloud, RigidMotion::identity(), 0.6), 1.0);
  }
}

TEST(Trajectory, StraightOverlapMatchesDiskLens) {
  TrajectorySpec t;
  t.model = TrajectoryModel::straight;
  t.n_frames = 6;
  t.frame_spacing = 10;
  t.sensor_range = 50;
  t.point_density = 0.5;
  t.seed = 108;
  const auto tr = generate_trajectory(t);
  const auto& f = tr.sequence.frames;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double ov = overlap(*f[i].cloud, *f[i + 1].cloud, registration_gt(f[i].pose, f[i + 1].pose), 0.6);
    EXPECT_NEAR(ov, disk_overlap_fraction(10, 50), 0.05);
  }
  EXPECT_EQ(f[3].timestamp, 3 * t.frame_dt);
}

TEST(Trajectory, UturnHasReversedPair) {
  TrajectorySpec t;
  t.model = TrajectoryModel::uturn;
  t.n_frames = 60;
  t.seed = 109;
  const auto tr = generate_trajectory(t);
  const std::vector<Sequence> seqs{tr.sequence};
  SelectorConfig cfg;
  cfg.k = 1;
  const auto pool = build_candidate_pool(seqs, cfg);
  double max_yaw = 0;
  for (const auto& c : pool) max_yaw = std::max(max_yaw, std::abs(c.motion.yaw));
  EXPECT_GT(max_yaw, 170.0);
}

TEST(Trajectory, DriveIsDeterministicAndPlanar) {
  TrajectorySpec t;
  t.n_frames = 30;
  t.seed = 110;
  const auto a = generate_trajectory(t), b = generate_trajectory(t);
  ASSERT_EQ(a.world, b.world);
  for (std::size_t i = 0; i < a.sequence.frames.size(); ++i) {
    EXPECT_EQ(a.sequence.frames[i].cloud->points, b.sequence.frames[i].cloud->points);
    const auto e = to_euler(a.sequence.frames[i].pose.rotation());
    EXPECT_LT(std::abs(e.roll), 5.0);
    EXPECT_LT(std::abs(e.pitch), 5.0);
    if (i > 0) {
      const auto d = motion_descriptor(a.sequence.frames[i - 1].pose, a.sequence.frames[i].pose);
      EXPECT_NEAR(std::hypot(d.dx, d.dy), t.frame_spacing, 0.2);
    }
  }
}

TEST(DiskOverlap, Values) {
  EXPECT_DOUBLE_EQ(disk_overlap_fraction(0, 5), 1.0);
  EXPECT_EQ(disk_overlap_fraction(10, 5), 0.0);
  EXPECT_NEAR(disk_overlap_fraction(5, 5), (2 * std::acos(0.5) - 0.5 * std::sqrt(3.0)) / std::numbers::pi, 1e-12);
}

}  // namespace
}  // namespace pcreg
