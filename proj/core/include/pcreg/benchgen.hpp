#pragma once

#include "pcreg/geom.hpp"
#include "pcreg/spatial_index.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcreg {

/// A frame with its sensor-to-world pose. The cloud is shared and optional for
/// callers that only need poses.
struct PosedFrame {
  std::size_t frame_index = 0;
  double timestamp = 0.0;
  RigidMotion pose;
  std::shared_ptr<const PointCloud> cloud;
};

struct Sequence {
  std::string id;
  std::vector<PosedFrame> frames;
};

/// Fraction of source points whose nearest target point, after mapping the
/// source by `gt`, lies within `tau`. Throws on empty clouds or tau <= 0.
double overlap(const PointCloud& src, const PointCloud& tgt, const RigidMotion& gt, double tau);
double overlap(const PointCloud& src, const SpatialIndex& tgt, const RigidMotion& gt, double tau);

/// Relative motion source -> target: inverse(pose_src) * pose_tgt, i.e. the
/// target sensor's pose in the source sensor frame.
struct MotionDescriptor6 {
  double dx = 0.0, dy = 0.0, dz = 0.0;        // meters
  double roll = 0.0, pitch = 0.0, yaw = 0.0;  // degrees

  std::array<double, 6> as_array() const { return {dx, dy, dz, roll, pitch, yaw}; }
  static MotionDescriptor6 from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

MotionDescriptor6 motion_descriptor(const RigidMotion& pose_src, const RigidMotion& pose_tgt);

/// Registration ground truth: maps source sensor coordinates to target sensor
/// coordinates, inverse(pose_tgt) * pose_src.
RigidMotion registration_gt(const RigidMotion& pose_src, const RigidMotion& pose_tgt);

struct CandidatePair {
  std::size_t sequence = 0;  // index into the input sequences
  std::string sequence_id;
  std::size_t src = 0, tgt = 0;  // frame_index values
  RigidMotion gt;
  MotionDescriptor6 motion;
  double overlap = 0.0;
  double dt = 0.0;        // |t_tgt - t_src|, seconds
  double distance = 0.0;  // meters between the sensor positions
};

struct SelectorConfig {
  std::size_t k = 10;          // source frame stride
  double min_overlap = 0.2;
  double r = 0.1;              // radius in the normalized 6-cube
  std::size_t target_count = 100;
  double overlap_tau = 0.6;
  std::uint64_t seed = 0;
  std::size_t attempt_factor = 1000;  // attempt budget = attempt_factor * target_count
  std::size_t threads = 1;            // overlap computation only

  void validate() const;
};

/// One candidate per source frame (every k-th frame of each sequence) that has
/// a qualifying target: overlap > min_overlap and a different frame. The
/// target is drawn uniformly among the qualifying frames. Frames need clouds.
std::vector<CandidatePair> build_candidate_pool(std::span<const Sequence> sequences,
                                                const SelectorConfig& cfg);

/// Per-axis min-max scaling to [0, 1]; a constant axis maps to 0.5.
struct MotionNormalizer {
  std::array<double, 6> lo{}, hi{};

  static MotionNormalizer fit(std::span<const MotionDescriptor6> motions);
  std::array<double, 6> normalize(const MotionDescriptor6& m) const;
  MotionDescriptor6 denormalize(const std::array<double, 6>& u) const;
};

std::vector<std::array<double, 6>> normalize_motions(std::span<const CandidatePair> pool,
                                                     MotionNormalizer* normalizer = nullptr);

struct Selection {
  std::size_t candidate = 0;       // index into the pool
  std::array<double, 6> draw{};    // the uniform point that selected it
  std::array<double, 6> position{};  // the candidate's normalized motion
};

struct SelectionResult {
  std::vector<Selection> selected;  // in selection order
  std::size_t attempts = 0;
  std::size_t discarded = 0;
  bool complete = false;  // false: budget or pool ran out before target_count
};

/// Uniform rejection sampling in the normalized motion cube with least-selected
/// sequence first tie-breaking. Selection is without replacement. Candidates at
/// or below min_overlap are never selected.
SelectionResult select_balanced(std::span<const CandidatePair> pool, const SelectorConfig& cfg);

/// Same, over precomputed normalized positions and sequence labels.
SelectionResult select_balanced(std::span<const std::array<double, 6>> positions,
                                std::span<const std::size_t> sequence_of, const SelectorConfig& cfg,
                                std::span<const double> overlaps = {});

/// A selected registration pair, as stored in pair-list files.
struct PairRecord {
  std::string sequence_id;
  std::size_t src = 0, tgt = 0;
  RigidMotion gt;
  double overlap = 0.0;
  double dt = 0.0;
};

PairRecord to_pair_record(const CandidatePair& c);

/// Disjoint assignment of sequences to splits. `ratios` are relative sizes
/// (e.g. {0.7, 0.1, 0.2}); returns the split index of every sequence id.
/// Sequences are shuffled with `seed` and split by cumulative count.
std::vector<std::size_t> split_by_sequence(std::span<const std::string> sequence_ids,
                                           std::span<const double> ratios, std::uint64_t seed);

}  // namespace pcreg
