#include <pcreg/benchgen.hpp>
#include <pcreg/synth.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

namespace pcreg {
namespace {

PointCloud grid_cloud(int n, double spacing, Vector3 offset = Vector3::Zero()) {
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pts.push_back(Point3(i * spacing, j * spacing, 0) + offset);
  }
  return PointCloud(pts);
}

TEST(Overlap, Examples) {
  const auto c = grid_cloud(20, 1.0);
  EXPECT_EQ(overlap(c, c, RigidMotion::identity(), 0.6), 1.0);
  const auto far = grid_cloud(20, 1.0, Vector3(1000, 0, 0));
  EXPECT_EQ(overlap(c, far, RigidMotion::identity(), 0.6), 0.0);
  // The ground truth moves the source onto the far copy.
  EXPECT_EQ(overlap(c, far, RigidMotion::from_translation(Vector3(1000, 0, 0)), 0.6), 1.0);
}

TEST(Overlap, SplitCloudHalf) {
  // 1000 points, 500 shared; the rest are >= 5 m from any target point.
  Rng rng(91);
  std::vector<Point3> shared, src_only, tgt_only;
  for (int i = 0; i < 500; ++i) shared.emplace_back(rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(0, 2));
  for (int i = 0; i < 500; ++i) src_only.emplace_back(rng.uniform(40, 60), rng.uniform(0, 20), rng.uniform(0, 2));
  for (int i = 0; i < 500; ++i) tgt_only.emplace_back(rng.uniform(-40, -20), rng.uniform(0, 20), rng.uniform(0, 2));
  std::vector<Point3> s = shared, t = shared;
  s.insert(s.end(), src_only.begin(), src_only.end());
  t.insert(t.end(), tgt_only.begin(), tgt_only.end());
  EXPECT_EQ(overlap(PointCloud(s), PointCloud(t), RigidMotion::identity(), 0.6), 0.5);
}

TEST(Overlap, MatchesBruteForce) {
  Rng rng(92);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point3> a, b;
    for (int i = 0; i < 300; ++i) a.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-1, 1));
    for (int i = 0; i < 300; ++i) b.emplace_back(rng.uniform(-5, 8), rng.uniform(-5, 5), rng.uniform(-1, 1));
    const RigidMotion gt = oracle::random_rigid(rng, 1.0);
    std::size_t hit = 0;
    for (const auto& p : a) {
      double best = INFINITY;
      for (const auto& q : b) best = std::min(best, (gt.apply(p) - q).squaredNorm());
      hit += best <= 0.36 ? 1 : 0;
    }
    EXPECT_EQ(overlap(PointCloud(a), PointCloud(b), gt, 0.6), double(hit) / 300.0);
  }
}

TEST(Overlap, Preconditions) {
  const auto c = grid_cloud(2, 1.0);
  EXPECT_THROW(overlap(PointCloud{}, c, RigidMotion::identity(), 0.6), std::invalid_argument);
  EXPECT_THROW(overlap(c, PointCloud{}, RigidMotion::identity(), 0.6), std::invalid_argument);
  EXPECT_THROW(overlap(c, c, RigidMotion::identity(), 0.0), std::invalid_argument);
}

TEST(MotionDescriptor, RelativeToSource) {
  const RigidMotion a(rot_z(90), Vector3(10, 0, 0));
  const RigidMotion b(rot_z(120), Vector3(10, 5, 0));
  const auto m = motion_descriptor(a, b);
  // In a's frame (x forward along world +y) the target is 5 m ahead.
  EXPECT_NEAR(m.dx, 5.0, 1e-12);
  EXPECT_NEAR(m.dy, 0.0, 1e-12);
  EXPECT_NEAR(m.yaw, 30.0, 1e-12);
  // The ground truth maps source coordinates into the target frame.
  const RigidMotion gt = registration_gt(a, b);
  const Point3 world(3, 4, 1);
  EXPECT_LT((gt.apply(inverse(a).apply(world)) - inverse(b).apply(world)).norm(), 1e-12);
}

Sequence sequence_of_clouds(const std::string& id, std::vector<std::pair<RigidMotion, PointCloud>> frames) {
  Sequence s;
  s.id = id;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    PosedFrame f;
    f.frame_index = i;
    f.timestamp = double(i);
    f.pose = frames[i].first;
    f.cloud = std::make_shared<PointCloud>(frames[i].second);
    s.frames.push_back(std::move(f));
  }
  return s;
}

TEST(CandidatePool, SingleFrameSequenceIsEmpty) {
  const std::vector<Sequence> seqs{sequence_of_clouds("a", {{RigidMotion::identity(), grid_cloud(5, 1)}})};
  EXPECT_TRUE(build_candidate_pool(seqs, SelectorConfig{}).empty());
}

TEST(CandidatePool, EveryFrameOverlapsEveryOther) {
  // Same world points seen from shifted poses: every pair overlaps fully.
  std::vector<std::pair<RigidMotion, PointCloud>> frames;
  const auto world = grid_cloud(10, 1.0);
  for (int i = 0; i < 7; ++i) {
    const RigidMotion pose = RigidMotion::from_translation(Vector3(0.5 * i, 0, 0));
    frames.emplace_back(pose, transform(inverse(pose), world));
  }
  const std::vector<Sequence> seqs{sequence_of_clouds("a", frames)};
  SelectorConfig cfg;
  cfg.k = 1;
  const auto pool = build_candidate_pool(seqs, cfg);
  ASSERT_EQ(pool.size(), 7u);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    EXPECT_EQ(pool[i].src, i);
    EXPECT_NE(pool[i].tgt, pool[i].src);
    EXPECT_EQ(pool[i].overlap, 1.0);
    EXPECT_EQ(pool[i].dt, std::abs(double(pool[i].tgt) - double(i)));
    EXPECT_NEAR(pool[i].distance, 0.5 * std::abs(double(pool[i].tgt) - double(i)), 1e-12);
  }
}

TEST(CandidatePool, StrideBoundsCountAndThreadsAgree) {
  TrajectorySpec ts;
  ts.model = TrajectoryModel::drive;
  ts.n_frames = 100;
  ts.point_density = 0.05;
  ts.seed = 93;
  const auto traj = generate_trajectory(ts);
  const std::vector<Sequence> seqs{traj.sequence};
  SelectorConfig cfg;
  cfg.k = 10;
  const auto pool = build_candidate_pool(seqs, cfg);
  EXPECT_LE(pool.size(), 10u);
  EXPECT_FALSE(pool.empty());
  for (const auto& c : pool) {
    EXPECT_EQ(c.src % 10, 0u);
    EXPECT_GT(c.overlap, cfg.min_overlap);
    const auto& a = traj.sequence.frames[c.src];
    const auto& b = traj.sequence.frames[c.tgt];
    EXPECT_EQ(c.overlap, overlap(*a.cloud, *b.cloud, registration_gt(a.pose, b.pose), 0.6));
  }
  cfg.threads = 3;
  const auto pool3 = build_candidate_pool(seqs, cfg);
  ASSERT_EQ(pool3.size(), pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    EXPECT_EQ(pool3[i].tgt, pool[i].tgt);
    EXPECT_EQ(pool3[i].overlap, pool[i].overlap);
  }
}

TEST(Normalize, Examples) {
  std::vector<MotionDescriptor6> m{{0, 3, 1, 0, 0, -90}, {10, 3, 2, 0, 0, 90}, {5, 3, 1.5, 0, 0, 0}};
  const auto n = MotionNormalizer::fit(m);
  const auto a = n.normalize(m[0]), b = n.normalize(m[1]), c = n.normalize(m[2]);
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(b[0], 1.0);
  EXPECT_EQ(c[0], 0.5);
  for (int k : {1, 3, 4}) {
    EXPECT_EQ(a[k], 0.5);
    EXPECT_EQ(b[k], 0.5);
  }
  for (const auto& x : m) {
    const auto back = n.denormalize(n.normalize(x)).as_array();
    const auto orig = x.as_array();
    for (int k : {0, 2, 5}) EXPECT_NEAR(back[k], orig[k], 1e-9);
  }
  EXPECT_THROW(MotionNormalizer::fit(std::vector<MotionDescriptor6>{}), std::invalid_argument);
}

TEST(SelectBalanced, SingleCandidateSelectedOnFirstHit) {
  const std::vector<std::array<double, 6>> pos{{0.5, 0.5, 0.5, 0.5, 0.5, 0.5}};
  const std::vector<std::size_t> seq{0};
  SelectorConfig cfg;
  cfg.r = 0.99;
  cfg.target_count = 1;
  const auto r = select_balanced(pos, seq, cfg);
  ASSERT_EQ(r.selected.size(), 1u);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.attempts, r.discarded + 1);
}

TEST(SelectBalanced, FarDrawsAreDiscarded) {
  // A corner candidate with a small radius: most draws miss it.
  const std::vector<std::array<double, 6>> pos{{0, 0, 0, 0, 0, 0}};
  const std::vector<std::size_t> seq{0};
  SelectorConfig cfg;
  cfg.r = 0.1;
  cfg.target_count = 1;
  cfg.attempt_factor = 50;
  const auto r = select_balanced(pos, seq, cfg);
  EXPECT_TRUE(r.selected.empty());
  EXPECT_EQ(r.attempts, 50u);
  EXPECT_EQ(r.discarded, 50u);
  EXPECT_FALSE(r.complete);
}

TEST(SelectBalanced, LowOverlapNeverSelected) {
  const std::vector<std::array<double, 6>> pos(4, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  const std::vector<std::size_t> seq{0, 0, 1, 1};
  const std::vector<double> ov{0.1, 0.9, 0.2, 0.5};
  SelectorConfig cfg;
  cfg.r = 0.99;
  cfg.target_count = 4;
  const auto r = select_balanced(pos, seq, cfg, ov);
  std::set<std::size_t> got;
  for (const auto& s : r.selected) got.insert(s.candidate);
  EXPECT_EQ(got, (std::set<std::size_t>{1, 3}));
  EXPECT_FALSE(r.complete);
}

// Replays a selection run and checks every step against the rules.
void check_selection_rules(std::span<const std::array<double, 6>> pos, std::span<const std::size_t> seq,
                           const SelectorConfig& cfg, const SelectionResult& r) {
  std::vector<bool> taken(pos.size(), false);
  std::vector<std::size_t> counts(*std::max_element(seq.begin(), seq.end()) + 1, 0);
  for (const auto& s : r.selected) {
    ASSERT_FALSE(taken[s.candidate]) << "selected twice";
    double d2 = 0;
    for (int a = 0; a < 6; ++a) d2 += (s.draw[a] - pos[s.candidate][a]) * (s.draw[a] - pos[s.candidate][a]);
    ASSERT_LE(d2, cfg.r * cfg.r);
    EXPECT_EQ(s.position, pos[s.candidate]);
    std::size_t least = SIZE_MAX;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (taken[i]) continue;
      double e2 = 0;
      for (int a = 0; a < 6; ++a) e2 += (s.draw[a] - pos[i][a]) * (s.draw[a] - pos[i][a]);
      if (e2 <= cfg.r * cfg.r) least = std::min(least, counts[seq[i]]);
    }
    ASSERT_EQ(counts[seq[s.candidate]], least) << "fairness rule violated";
    taken[s.candidate] = true;
    counts[seq[s.candidate]]++;
  }
}

TEST(SelectBalanced, FairnessPrefersLeastSelectedSequence) {
  // Sequence 0 owns a private cluster; both sequences share another. Once
  // sequence 0 leads, shared-cluster picks must come from sequence 1.
  std::vector<std::array<double, 6>> pos;
  std::vector<std::size_t> seq;
  for (int i = 0; i < 5; ++i) {
    pos.push_back({0.2, 0.2, 0.2, 0.2, 0.2, 0.2});
    seq.push_back(0);
  }
  for (int i = 0; i < 3; ++i) {
    pos.push_back({0.8, 0.8, 0.8, 0.8, 0.8, 0.8});
    seq.push_back(0);
    pos.push_back({0.8, 0.8, 0.8, 0.8, 0.8, 0.8});
    seq.push_back(1);
  }
  SelectorConfig cfg;
  cfg.r = 0.6;
  cfg.target_count = pos.size();
  bool saw_lead = false;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    const auto r = select_balanced(pos, seq, cfg);
    EXPECT_TRUE(r.complete);
    check_selection_rules(pos, seq, cfg, r);
    // Look for the 5-vs-2 situation: a shared-cluster pick while sequence 0 leads.
    std::size_t c0 = 0, c1 = 0;
    for (const auto& s : r.selected) {
      if (s.candidate >= 5 && c0 == 5 && c1 == 2) {
        saw_lead = true;
        EXPECT_EQ(seq[s.candidate], 1u);
      }
      (seq[s.candidate] == 0 ? c0 : c1)++;
    }
  }
  EXPECT_TRUE(saw_lead);
}

TEST(SelectBalanced, RandomPoolsFollowRules) {
  Rng rng(94);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::array<double, 6>> pos(300);
    std::vector<std::size_t> seq(300);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (double& x : pos[i]) x = rng.uniform01();
      seq[i] = rng.index(4);
    }
    SelectorConfig cfg;
    cfg.r = 0.4;
    cfg.target_count = 100;
    cfg.seed = std::uint64_t(trial);
    const auto r = select_balanced(pos, seq, cfg);
    check_selection_rules(pos, seq, cfg, r);
    EXPECT_EQ(r.attempts, r.selected.size() + r.discarded);
  }
}

TEST(SelectBalanced, Deterministic) {
  Rng rng(95);
  std::vector<std::array<double, 6>> pos(200);
  std::vector<std::size_t> seq(200);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (double& x : pos[i]) x = rng.uniform01();
    seq[i] = i % 3;
  }
  SelectorConfig cfg;
  cfg.r = 0.5;
  cfg.target_count = 50;
  cfg.seed = 9;
  const auto a = select_balanced(pos, seq, cfg), b = select_balanced(pos, seq, cfg);
  ASSERT_EQ(a.selected.size(), b.selected.size());
  for (std::size_t i = 0; i < a.selected.size(); ++i) EXPECT_EQ(a.selected[i].candidate, b.selected[i].candidate);
}

TEST(SelectorConfig, Validation) {
  SelectorConfig c;
  c.r = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.min_overlap = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.k = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Split, DisjointAndDeterministic) {
  std::vector<std::string> ids;
  for (int i = 0; i < 20; ++i) ids.push_back("s" + std::to_string(i));
  const std::vector<double> ratios{0.7, 0.1, 0.2};
  const auto a = split_by_sequence(ids, ratios, 5);
  EXPECT_EQ(a, split_by_sequence(ids, ratios, 5));
  ASSERT_EQ(a.size(), ids.size());
  std::vector<std::size_t> counts(3, 0);
  for (auto s : a) counts.at(s)++;
  EXPECT_EQ(counts, (std::vector<std::size_t>{14, 2, 4}));
  // Input order does not matter.
  std::vector<std::string> rev(ids.rbegin(), ids.rend());
  const auto b = split_by_sequence(rev, ratios, 5);
  for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(b[ids.size() - 1 - i], a[i]);
  EXPECT_THROW(split_by_sequence(ids, std::vector<double>{}, 1), std::invalid_argument);
}

TEST(PairRecord, FromCandidate) {
  CandidatePair c;
  c.sequence_id = "07";
  c.src = 10;
  c.tgt = 17;
  c.gt = RigidMotion(rot_z(5), Vector3(1, 2, 3));
  c.overlap = 0.4;
  c.dt = 0.7;
  const auto r = to_pair_record(c);
  EXPECT_EQ(r.sequence_id, "07");
  EXPECT_EQ(r.src, 10u);
  EXPECT_EQ(r.tgt, 17u);
  EXPECT_EQ(max_abs_difference(r.gt, c.gt), 0.0);
  EXPECT_EQ(r.overlap, 0.4);
  EXPECT_EQ(r.dt, 0.7);
}

}  // namespace
}  // namespace pcreg
