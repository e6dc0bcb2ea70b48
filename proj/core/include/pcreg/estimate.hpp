#pragma once

#include "pcreg/geom.hpp"
#include "pcreg/match.hpp"
#include "pcreg/random.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pcreg {

// ---------------------------------------------------------------------------
// Minimal and least-squares solvers
// ---------------------------------------------------------------------------

/// Weighted least-squares rigid motion mapping `src[i]` onto `dst[i]`
/// (Kabsch/Umeyama without scale). det(R) = +1 is enforced by flipping the
/// singular vector of the smallest singular value.
///
/// Returns std::nullopt when the cross-covariance has rank < 2 (collinear or
/// coincident points), which callers treat as a rejected hypothesis.
/// Throws std::invalid_argument for fewer than 3 pairs, mismatched sizes, or
/// negative weights.
std::optional<RigidMotion> kabsch(std::span<const Point3> src, std::span<const Point3> dst,
                                  std::span<const double> weights = {});

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct InlierSet {
  std::size_t count = 0;
  std::vector<bool> mask;
};

/// mask[i] <=> |motion(src[c.src]) - dst[c.dst]| <= threshold.
InlierSet count_inliers(const RigidMotion& motion, std::span<const Correspondence> corrs,
                        const PointCloud& src_cloud, const PointCloud& dst_cloud,
                        double threshold);

/// Hypotheses needed to draw one all-inlier minimal sample with probability
/// `confidence`: ceil(log(1 - confidence) / log(1 - w^m)), clamped to
/// [1, max_iterations].
std::size_t required_iterations(double confidence, double inlier_fraction,
                                std::size_t max_iterations, int sample_size = 3);

// ---------------------------------------------------------------------------
// Fast rejection
// ---------------------------------------------------------------------------

/// Edge-length consistency: each of the three sample edges has the same length
/// in source and target, within `tolerance`.
bool elc_check(std::span<const Correspondence, 3> sample, const PointCloud& src_cloud,
               const PointCloud& dst_cloud, double tolerance);
bool elc_check(const std::array<Point3, 3>& src, const std::array<Point3, 3>& dst,
               double tolerance);

/// Wald SPRT parameters. epsilon: probability that a point is consistent with
/// a good model; delta: with a bad model. model_time is the cost of one
/// hypothesis in units of one point verification.
struct SprtParams {
  double epsilon = 0.2;
  double delta = 0.05;
  double model_time = 200.0;
  double models_per_sample = 1.0;
};

/// Decision threshold A: fixed point of A = model_time * C / models_per_sample
/// + 1 + ln A, with C the Kullback-Leibler divergence of the two Bernoulli
/// hypotheses.
double sprt_threshold(double epsilon, double delta, double model_time,
                      double models_per_sample);

struct SprtState {
  SprtParams params;
  double epsilon = 0.2;
  double delta = 0.05;
  double threshold = 1.0;
  std::size_t best_inliers = 0;

  explicit SprtState(const SprtParams& p = {});
  /// Re-estimates epsilon from a new best model's inlier fraction (delta is
  /// fixed). Estimates at or below delta carry no evidence and are ignored.
  void on_new_best(std::size_t inliers, std::size_t total);
};

enum class SprtDecision { accept_continue, reject_early };

struct SprtOutcome {
  SprtDecision decision = SprtDecision::accept_continue;
  std::size_t evaluated = 0;  // points verified before the decision
  InlierSet inliers;          // full set when accepted; partial when rejected
};

/// Sequential verification in correspondence order. The likelihood ratio is
/// multiplied by delta/epsilon per consistent point and (1-delta)/(1-epsilon)
/// per inconsistent point; the model is rejected once it exceeds the
/// threshold. An accepted model that beats state.best_inliers updates the
/// state.
SprtOutcome sprt_evaluate(const RigidMotion& motion, std::span<const Correspondence> corrs,
                          const PointCloud& src_cloud, const PointCloud& dst_cloud,
                          double inlier_threshold, SprtState& state);

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// T'_n of the PROSAC growth function for n = m..N (entry k is n = m + k).
/// Hypothesis t draws from the top-n(t) ranked items, n(t) = min{n : T'_n >= t}.
std::vector<std::size_t> prosac_growth_schedule(std::size_t n_items, std::size_t growth_max,
                                                int sample_size = 3);

/// Progressive sampler over items ranked best-first (positions 0..N-1).
class ProsacSampler {
public:
  ProsacSampler(std::size_t n_items, std::size_t growth_max, int sample_size = 3);

  /// Draw for the next hypothesis. While the subset is still growing the
  /// sample holds position n-1 plus m-1 positions from the first n-1;
  /// afterwards it is uniform over the top n.
  std::array<std::size_t, 3> next(Rng& rng);

  std::size_t subset_size() const { return n_; }
  std::size_t hypotheses() const { return t_; }

private:
  std::size_t n_items_;
  int m_;
  std::size_t t_ = 0;
  std::size_t n_;
  double tn_;                 // T_n
  std::size_t tn_prime_ = 1;  // T'_n
};

/// Three distinct positions uniformly from [0, n).
std::array<std::size_t, 3> uniform_sample(std::size_t n, Rng& rng);

// ---------------------------------------------------------------------------
// RANSAC driver
// ---------------------------------------------------------------------------

enum class SamplerKind { uniform, prosac };
enum class RejectionKind { none, elc, sprt };
enum class StopReason { early_stop, iteration_cap };

struct RansacConfig {
  std::size_t max_iterations = 1'000'000;
  double confidence = 0.999;
  double inlier_threshold = 0.6;
  SamplerKind sampler = SamplerKind::prosac;
  RejectionKind rejection = RejectionKind::elc;
  bool use_lo = true;
  double elc_tolerance = 0.6;
  SprtParams sprt;
  std::size_t lo_inner_iterations = 50;
  std::size_t lo_max_rounds = 10;
  std::size_t lo_sample_cap = 14;
  std::size_t prosac_growth_max = 200'000;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct Hypothesis {
  RigidMotion motion;
  std::array<std::size_t, 3> sample{};  // correspondence indices
  std::size_t inlier_count = 0;
  std::vector<bool> inlier_mask;
};

/// A change of the best-so-far model.
struct BestUpdate {
  std::size_t iteration = 0;
  std::size_t inlier_count = 0;
  RigidMotion motion;
  bool from_local_optimization = false;
};

struct RegistrationResult {
  RigidMotion motion;
  std::vector<bool> inlier_mask;  // over the input correspondences
  std::size_t inlier_count = 0;
  std::size_t iterations_run = 0;
  std::size_t hypotheses_rejected_fast = 0;
  std::size_t lo_rounds = 0;
  double wall_time = 0.0;  // seconds
  StopReason converged_by = StopReason::iteration_cap;
  bool found_model = false;
  std::vector<BestUpdate> best_trace;
};

/// Local optimization of a best-so-far model: lo_inner_iterations rounds of
/// a non-minimal fit on a random subset of its inliers, each followed by
/// least-squares re-fits on the inliers at thresholds annealed from 2x to 1x
/// inlier_threshold over 4 steps. Returns the model with the most inliers;
/// `best` itself wins ties.
Hypothesis lo_step(const Hypothesis& best, std::span<const Correspondence> corrs,
                   const PointCloud& src_cloud, const PointCloud& dst_cloud,
                   const RansacConfig& cfg, Rng& rng);

/// Robust rigid registration from putative correspondences. Single-threaded
/// and bit-deterministic for a fixed cfg.seed. Throws std::invalid_argument on
/// fewer than 3 correspondences or an invalid config.
RegistrationResult ransac_register(const PointCloud& src_cloud, const PointCloud& dst_cloud,
                                   std::span<const Correspondence> corrs,
                                   const RansacConfig& cfg);

}  // namespace pcreg
