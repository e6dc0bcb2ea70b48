#pragma once

#include "pcreg/geom.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pcreg {

/// Success thresholds; both comparisons are strict.
struct SuccessCriteria {
  double max_re_deg = 5.0;
  double max_te_m = 0.6;
};

/// Geodesic angle between two rotations in degrees, in [0, 180].
///
/// Computed as atan2(sin, cos) of the relative rotation, which equals
/// arccos((tr(est^T gt) - 1) / 2) but keeps full precision near 0 and 180.
double rotation_error(const Matrix3& est, const Matrix3& gt);
double translation_error(const Vector3& est, const Vector3& gt);
bool is_success(double re_deg, double te_m, const SuccessCriteria& criteria = {});

enum class Stage { coarse, refined };

struct EvalRecord {
  double re_deg = 0.0;
  double te_m = 0.0;
  bool success = false;
  double wall_time = 0.0;
  Stage stage = Stage::coarse;
};

EvalRecord evaluate(const RigidMotion& est, const RigidMotion& gt, double wall_time = 0.0,
                    Stage stage = Stage::coarse, const SuccessCriteria& criteria = {});

/// Fraction of successful records. Throws std::invalid_argument on empty input.
double recall(std::span<const EvalRecord> records);

// ---------------------------------------------------------------------------
// Distribution reports
// ---------------------------------------------------------------------------

enum class PairParameter { distance, time_offset, overlap, roll, pitch, yaw };

inline constexpr PairParameter kAllPairParameters[] = {
    PairParameter::distance, PairParameter::time_offset, PairParameter::overlap,
    PairParameter::roll,     PairParameter::pitch,       PairParameter::yaw};

/// "distance", "dt", "overlap", "roll", "pitch", "yaw".
const char* to_string(PairParameter p);

/// The six per-pair quantities used in distribution and failure reports.
struct PairParameters {
  double distance = 0.0;  // meters between the two sensor positions
  double time_offset = 0.0;
  double overlap = 0.0;
  double roll = 0.0, pitch = 0.0, yaw = 0.0;  // degrees, relative motion source -> target

  double get(PairParameter p) const;
};

/// Parameters of a pair given its registration ground truth (source coordinates
/// to target coordinates). The relative motion is its inverse: the target
/// sensor's pose in the source frame.
PairParameters pair_parameters(const RigidMotion& gt, double overlap, double time_offset);

struct HistogramSpec {
  PairParameter parameter = PairParameter::distance;
  std::vector<double> edges;  // strictly increasing, at least 2

  void validate() const;
  std::size_t bins() const { return edges.size() - 1; }
};

/// Edges: distance [0,60] step 5; dt [0,60] step 5; overlap [0.2,1] step 0.05;
/// roll and pitch [-10,10] step 1; yaw [-180,180] step 15.
HistogramSpec default_histogram(PairParameter p);

/// Bin [e_i, e_{i+1}); the last bin also takes its upper edge. Values outside
/// the edges fall into the nearest end bin. Throws on NaN.
std::size_t bin_index(const HistogramSpec& spec, double value);

struct CountBin {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
};

struct FailureBin {
  double lo = 0.0, hi = 0.0;
  std::size_t success = 0;
  std::size_t failure = 0;
  double failure_ratio = 0.0;  // 0 for empty bins
};

std::vector<CountBin> histogram(std::span<const double> values, const HistogramSpec& spec);

/// values[i] belongs to records[i].
std::vector<FailureBin> failure_histogram(std::span<const double> values,
                                          std::span<const EvalRecord> records,
                                          const HistogramSpec& spec);

struct DistributionHistogram {
  PairParameter parameter;
  std::vector<CountBin> bins;
};

/// One histogram per parameter of `specs` (default: all six with default edges).
/// Throws std::invalid_argument on empty input.
std::vector<DistributionHistogram> set_distribution_report(
    std::span<const PairParameters> pairs, std::span<const HistogramSpec> specs = {});

}  // namespace pcreg
