#include "pcreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pcreg {

double rotation_error(const Matrix3& est, const Matrix3& gt) {
  const Matrix3 r = est.transpose() * gt;
  const Vector3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * axis.norm();
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

double translation_error(const Vector3& est, const Vector3& gt) { return (est - gt).norm(); }

bool is_success(double re_deg, double te_m, const SuccessCriteria& criteria) {
  return re_deg < criteria.max_re_deg && te_m < criteria.max_te_m;
}

EvalRecord evaluate(const RigidMotion& est, const RigidMotion& gt, double wall_time, Stage stage,
                    const SuccessCriteria& criteria) {
  EvalRecord r;
  r.re_deg = rotation_error(est.rotation(), gt.rotation());
  r.te_m = translation_error(est.translation(), gt.translation());
  r.success = is_success(r.re_deg, r.te_m, criteria);
  r.wall_time = wall_time;
  r.stage = stage;
  return r;
}

double recall(std::span<const EvalRecord> records) {
  if (records.empty()) throw std::invalid_argument("recall: no records");
  const auto ok = std::count_if(records.begin(), records.end(),
                                [](const EvalRecord& r) { return r.success; });
  return double(ok) / double(records.size());
}

// ---------------------------------------------------------------------------

const char* to_string(PairParameter p) {
  switch (p) {
    case PairParameter::distance: return "distance";
    case PairParameter::time_offset: return "dt";
    case PairParameter::overlap: return "overlap";
    case PairParameter::roll: return "roll";
    case PairParameter::pitch: return "pitch";
    case PairParameter::yaw: return "yaw";
  }
  return "unknown";
}

double PairParameters::get(PairParameter p) const {
  switch (p) {
    case PairParameter::distance: return distance;
    case PairParameter::time_offset: return time_offset;
    case PairParameter::overlap: return overlap;
    case PairParameter::roll: return roll;
    case PairParameter::pitch: return pitch;
    case PairParameter::yaw: return yaw;
  }
  return 0.0;
}

PairParameters pair_parameters(const RigidMotion& gt, double overlap, double time_offset) {
  const RigidMotion rel = inverse(gt);
  const EulerAngles e = to_euler(rel.rotation());
  PairParameters p;
  p.distance = rel.translation().norm();
  p.time_offset = time_offset;
  p.overlap = overlap;
  p.roll = e.roll;
  p.pitch = e.pitch;
  p.yaw = e.yaw;
  return p;
}

void HistogramSpec::validate() const {
  if (edges.size() < 2) throw std::invalid_argument("HistogramSpec: need at least two edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i])) throw std::invalid_argument("HistogramSpec: non-finite edge");
    if (i > 0 && !(edges[i] > edges[i - 1])) {
      throw std::invalid_argument("HistogramSpec: edges must be strictly increasing");
    }
  }
}

namespace {

std::vector<double> linspace_step(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
  std::vector<double> e(n + 1);
  // Rounded to 1e-9 so that edges such as 0.35 print as written.
  for (std::size_t i = 0; i <= n; ++i) e[i] = std::round((lo + step * double(i)) * 1e9) / 1e9;
  e.back() = hi;
  return e;
}

}  // namespace

HistogramSpec default_histogram(PairParameter p) {
  switch (p) {
    case PairParameter::distance: return {p, linspace_step(0.0, 60.0, 5.0)};
    case PairParameter::time_offset: return {p, linspace_step(0.0, 60.0, 5.0)};
    case PairParameter::overlap: return {p, linspace_step(0.2, 1.0, 0.05)};
    case PairParameter::roll:
    case PairParameter::pitch: return {p, linspace_step(-10.0, 10.0, 1.0)};
    case PairParameter::yaw: return {p, linspace_step(-180.0, 180.0, 15.0)};
  }
  throw std::invalid_argument("default_histogram: unknown parameter");
}

std::size_t bin_index(const HistogramSpec& spec, double value) {
  if (std::isnan(value)) throw std::invalid_argument("bin_index: NaN value");
  const auto& e = spec.edges;
  const auto it = std::upper_bound(e.begin(), e.end(), value);
  if (it == e.begin()) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(it - e.begin()) - 1, spec.bins() - 1);
}

std::vector<CountBin> histogram(std::span<const double> values, const HistogramSpec& spec) {
  spec.validate();
  std::vector<CountBin> out(spec.bins());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].lo = spec.edges[i];
    out[i].hi = spec.edges[i + 1];
  }
  for (double v : values) ++out[bin_index(spec, v)].count;
  return out;
}

std::vector<FailureBin> failure_histogram(std::span<const double> values,
                                          std::span<const EvalRecord> records,
                                          const HistogramSpec& spec) {
  spec.validate();
  if (values.size() != records.size()) {
    throw std::invalid_argument("failure_histogram: one value per record required");
  }
  std::vector<FailureBin> out(spec.bins());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].lo = spec.edges[i];
    out[i].hi = spec.edges[i + 1];
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    FailureBin& b = out[bin_index(spec, values[i])];
    if (records[i].success) {
      ++b.success;
    } else {
      ++b.failure;
    }
  }
  for (auto& b : out) {
    const std::size_t total = b.success + b.failure;
    b.failure_ratio = total ? double(b.failure) / double(total) : 0.0;
  }
  return out;
}

std::vector<DistributionHistogram> set_distribution_report(std::span<const PairParameters> pairs,
                                                           std::span<const HistogramSpec> specs) {
  if (pairs.empty()) throw std::invalid_argument("set_distribution_report: no pairs");
  std::vector<HistogramSpec> chosen(specs.begin(), specs.end());
  if (chosen.empty()) {
    for (PairParameter p : kAllPairParameters) chosen.push_back(default_histogram(p));
  }
  std::vector<DistributionHistogram> out;
  std::vector<double> values(pairs.size());
  for (const auto& spec : chosen) {
    for (std::size_t i = 0; i < pairs.size(); ++i) values[i] = pairs[i].get(spec.parameter);
    out.push_back({spec.parameter, histogram(values, spec)});
  }
  return out;
}

}  // namespace pcreg
