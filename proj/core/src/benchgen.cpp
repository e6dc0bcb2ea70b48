#include "pcreg/benchgen.hpp"

#include "pcreg/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace pcreg {

double overlap(const PointCloud& src, const PointCloud& tgt, const RigidMotion& gt, double tau) {
  if (tgt.empty()) throw std::invalid_argument("overlap: empty target cloud");
  return overlap(src, SpatialIndex(tgt), gt, tau);
}

double overlap(const PointCloud& src, const SpatialIndex& tgt, const RigidMotion& gt,
               double tau) {
  if (src.empty() || tgt.empty()) throw std::invalid_argument("overlap: empty cloud");
  if (!(tau > 0.0)) throw std::invalid_argument("overlap: tau must be > 0");

  // Cheap reject: the mapped source box, grown by tau, misses the target box.
  Point3 lo = Point3::Constant(INFINITY), hi = Point3::Constant(-INFINITY);
  std::vector<Point3> mapped;
  mapped.reserve(src.size());
  for (const Point3& p : src.points) {
    mapped.push_back(gt.apply(p));
    lo = lo.cwiseMin(mapped.back());
    hi = hi.cwiseMax(mapped.back());
  }
  for (int a = 0; a < 3; ++a) {
    if (lo[a] - tau > tgt.max_corner()[a] || hi[a] + tau < tgt.min_corner()[a]) return 0.0;
  }

  const double t2 = tau * tau;
  std::size_t hits = 0;
  for (const Point3& q : mapped) hits += tgt.nearest(q).sq_distance <= t2 ? 1 : 0;
  return double(hits) / double(src.size());
}

MotionDescriptor6 motion_descriptor(const RigidMotion& pose_src, const RigidMotion& pose_tgt) {
  const RigidMotion rel = compose(inverse(pose_src), pose_tgt);
  const EulerAngles e = to_euler(rel.rotation());
  const Vector3& t = rel.translation();
  return {t.x(), t.y(), t.z(), e.roll, e.pitch, e.yaw};
}

RigidMotion registration_gt(const RigidMotion& pose_src, const RigidMotion& pose_tgt) {
  return compose(inverse(pose_tgt), pose_src);
}

void SelectorConfig::validate() const {
  if (k < 1) throw std::invalid_argument("SelectorConfig: k must be >= 1");
  if (!(min_overlap > 0.0 && min_overlap < 1.0)) {
    throw std::invalid_argument("SelectorConfig: min_overlap must be in (0, 1)");
  }
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("SelectorConfig: r must be in (0, 1)");
  if (!(overlap_tau > 0.0)) throw std::invalid_argument("SelectorConfig: overlap_tau must be > 0");
  if (attempt_factor < 1) throw std::invalid_argument("SelectorConfig: attempt_factor must be >= 1");
}

std::vector<CandidatePair> build_candidate_pool(std::span<const Sequence> sequences,
                                                const SelectorConfig& cfg) {
  cfg.validate();

  struct Job {
    std::size_t seq, src;
    std::vector<double> overlaps;  // per frame of the sequence; -1 for src itself
  };
  std::vector<Job> jobs;
  std::vector<std::vector<SpatialIndex>> indexes(sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& frames = sequences[s].frames;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (!frames[i].cloud || frames[i].cloud->empty()) {
        throw std::invalid_argument("build_candidate_pool: sequence " + sequences[s].id +
                                    " frame " + std::to_string(frames[i].frame_index) +
                                    " has no points");
      }
      if (i > 0 && frames[i].timestamp < frames[i - 1].timestamp) {
        throw std::invalid_argument("build_candidate_pool: timestamps decrease in sequence " +
                                    sequences[s].id);
      }
    }
    if (frames.size() < 2) continue;
    for (std::size_t i = 0; i < frames.size(); i += cfg.k) jobs.push_back({s, i, {}});
  }

  auto index_of = [&](std::size_t s) -> const std::vector<SpatialIndex>& { return indexes[s]; };
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (sequences[s].frames.size() < 2) continue;
    indexes[s].reserve(sequences[s].frames.size());
    for (const auto& f : sequences[s].frames) indexes[s].emplace_back(*f.cloud);
  }

  auto run = [&](Job& job) {
    const auto& frames = sequences[job.seq].frames;
    const PosedFrame& src = frames[job.src];
    job.overlaps.assign(frames.size(), -1.0);
    for (std::size_t j = 0; j < frames.size(); ++j) {
      if (j == job.src) continue;
      job.overlaps[j] = overlap(*src.cloud, index_of(job.seq)[j],
                                registration_gt(src.pose, frames[j].pose), cfg.overlap_tau);
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, jobs.size()));
  if (workers == 1) {
    for (auto& job : jobs) run(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run(jobs[i]);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Target choice is sequential so the result does not depend on thread count.
  Rng rng(cfg.seed);
  std::vector<CandidatePair> out;
  std::vector<std::size_t> qualifying;
  for (const Job& job : jobs) {
    qualifying.clear();
    for (std::size_t j = 0; j < job.overlaps.size(); ++j) {
      if (job.overlaps[j] > cfg.min_overlap) qualifying.push_back(j);
    }
    if (qualifying.empty()) continue;
    const std::size_t j = qualifying[rng.index(qualifying.size())];

    const auto& frames = sequences[job.seq].frames;
    const PosedFrame& a = frames[job.src];
    const PosedFrame& b = frames[j];
    CandidatePair c;
    c.sequence = job.seq;
    c.sequence_id = sequences[job.seq].id;
    c.src = a.frame_index;
    c.tgt = b.frame_index;
    c.gt = registration_gt(a.pose, b.pose);
    c.motion = motion_descriptor(a.pose, b.pose);
    c.overlap = job.overlaps[j];
    c.dt = std::abs(b.timestamp - a.timestamp);
    c.distance = Vector3(c.motion.dx, c.motion.dy, c.motion.dz).norm();
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------

MotionNormalizer MotionNormalizer::fit(std::span<const MotionDescriptor6> motions) {
  if (motions.empty()) throw std::invalid_argument("MotionNormalizer: no motions");
  MotionNormalizer n;
  n.lo.fill(INFINITY);
  n.hi.fill(-INFINITY);
  for (const auto& m : motions) {
    const auto a = m.as_array();
    for (int i = 0; i < 6; ++i) {
      n.lo[i] = std::min(n.lo[i], a[i]);
      n.hi[i] = std::max(n.hi[i], a[i]);
    }
  }
  return n;
}

std::array<double, 6> MotionNormalizer::normalize(const MotionDescriptor6& m) const {
  const auto a = m.as_array();
  std::array<double, 6> u{};
  for (int i = 0; i < 6; ++i) u[i] = hi[i] > lo[i] ? (a[i] - lo[i]) / (hi[i] - lo[i]) : 0.5;
  return u;
}

MotionDescriptor6 MotionNormalizer::denormalize(const std::array<double, 6>& u) const {
  std::array<double, 6> a{};
  for (int i = 0; i < 6; ++i) a[i] = hi[i] > lo[i] ? lo[i] + u[i] * (hi[i] - lo[i]) : lo[i];
  return MotionDescriptor6::from_array(a);
}

std::vector<std::array<double, 6>> normalize_motions(std::span<const CandidatePair> pool,
                                                     MotionNormalizer* normalizer) {
  std::vector<MotionDescriptor6> motions;
  motions.reserve(pool.size());
  for (const auto& c : pool) motions.push_back(c.motion);
  const MotionNormalizer n = MotionNormalizer::fit(motions);
  if (normalizer) *normalizer = n;
  std::vector<std::array<double, 6>> out;
  out.reserve(pool.size());
  for (const auto& m : motions) out.push_back(n.normalize(m));
  return out;
}

// ---------------------------------------------------------------------------

SelectionResult select_balanced(std::span<const CandidatePair> pool, const SelectorConfig& cfg) {
  if (pool.empty()) throw std::invalid_argument("select_balanced: empty candidate pool");
  const auto positions = normalize_motions(pool);
  std::vector<std::size_t> seq(pool.size());
  std::vector<double> overlaps(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    seq[i] = pool[i].sequence;
    overlaps[i] = pool[i].overlap;
  }
  return select_balanced(positions, seq, cfg, overlaps);
}

SelectionResult select_balanced(std::span<const std::array<double, 6>> positions,
                                std::span<const std::size_t> sequence_of, const SelectorConfig& cfg,
                                std::span<const double> overlaps) {
  cfg.validate();
  if (positions.empty()) throw std::invalid_argument("select_balanced: empty candidate pool");
  if (sequence_of.size() != positions.size() ||
      (!overlaps.empty() && overlaps.size() != positions.size())) {
    throw std::invalid_argument("select_balanced: per-candidate arrays differ in length");
  }

  // Candidates failing the overlap constraint are never eligible.
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (overlaps.empty() || overlaps[i] > cfg.min_overlap) open.push_back(i);
  }
  const std::size_t n_seq =
      *std::max_element(sequence_of.begin(), sequence_of.end()) + 1;
  std::vector<std::size_t> seq_count(n_seq, 0);

  Rng rng(cfg.seed);
  SelectionResult result;
  const std::size_t budget = cfg.attempt_factor * std::max<std::size_t>(1, cfg.target_count);
  const double r2 = cfg.r * cfg.r;
  std::vector<std::size_t> near, fewest;

  while (result.selected.size() < cfg.target_count && !open.empty() &&
         result.attempts < budget) {
    ++result.attempts;
    std::array<double, 6> u{};
    for (double& x : u) x = rng.uniform01();

    near.clear();
    for (std::size_t k = 0; k < open.size(); ++k) {
      const auto& p = positions[open[k]];
      double d2 = 0.0;
      for (int a = 0; a < 6; ++a) d2 += (p[a] - u[a]) * (p[a] - u[a]);
      if (d2 <= r2) near.push_back(k);
    }
    if (near.empty()) {
      ++result.discarded;
      continue;
    }

    std::size_t least = SIZE_MAX;
    for (std::size_t k : near) least = std::min(least, seq_count[sequence_of[open[k]]]);
    fewest.clear();
    for (std::size_t k : near) {
      if (seq_count[sequence_of[open[k]]] == least) fewest.push_back(k);
    }
    const std::size_t pick = fewest[rng.index(fewest.size())];
    const std::size_t cand = open[pick];
    ++seq_count[sequence_of[cand]];
    result.selected.push_back({cand, u, positions[cand]});
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  result.complete = result.selected.size() >= cfg.target_count;
  return result;
}

PairRecord to_pair_record(const CandidatePair& c) {
  return {c.sequence_id, c.src, c.tgt, c.gt, c.overlap, c.dt};
}

std::vector<std::size_t> split_by_sequence(std::span<const std::string> sequence_ids,
                                           std::span<const double> ratios, std::uint64_t seed) {
  if (ratios.empty()) throw std::invalid_argument("split_by_sequence: no ratios");
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw std::invalid_argument("split_by_sequence: negative ratio");
    total += r;
  }
  if (!(total > 0.0)) throw std::invalid_argument("split_by_sequence: ratios sum to zero");

  // Shuffle a sorted copy so the result depends on the id set, not its order.
  std::vector<std::size_t> order(sequence_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sequence_ids[a] < sequence_ids[b]; });
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<std::size_t> split(sequence_ids.size(), ratios.size() - 1);
  const double n = double(order.size());
  double cum = 0.0;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < ratios.size(); ++s) {
    cum += ratios[s];
    const auto end = s + 1 == ratios.size()
                         ? order.size()
                         : static_cast<std::size_t>(std::llround(n * cum / total));
    for (; pos < end && pos < order.size(); ++pos) split[order[pos]] = s;
  }
  return split;
}

}  // namespace pcreg
