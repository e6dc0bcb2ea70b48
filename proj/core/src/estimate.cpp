#include "pcreg/estimate.hpp"

#include "pcreg/filter.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pcreg {
namespace {

// Rank test on the cross-covariance: second singular value relative to the first.
constexpr double kDegenerateRatio = 1e-10;

/// Correspondence endpoints gathered into contiguous arrays.
struct PairGeometry {
  std::vector<Point3> src;
  std::vector<Point3> dst;

  PairGeometry(std::span<const Correspondence> corrs, const PointCloud& src_cloud,
               const PointCloud& dst_cloud) {
    src.reserve(corrs.size());
    dst.reserve(corrs.size());
    for (const auto& c : corrs) {
      if (c.src >= src_cloud.size() || c.dst >= dst_cloud.size()) {
        throw std::out_of_range("correspondence (" + std::to_string(c.src) + ", " +
                                std::to_string(c.dst) + ") indexes outside its cloud");
      }
      src.push_back(src_cloud[c.src]);
      dst.push_back(dst_cloud[c.dst]);
    }
  }

  std::size_t size() const { return src.size(); }
};

std::size_t count_within(const RigidMotion& m, const PairGeometry& g, double threshold) {
  const double t2 = threshold * threshold;
  const Matrix3& r = m.rotation();
  const Vector3& t = m.translation();
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    count += ((r * g.src[i] + t) - g.dst[i]).squaredNorm() <= t2 ? 1 : 0;
  }
  return count;
}

InlierSet inliers_within(const RigidMotion& m, const PairGeometry& g, double threshold) {
  const double t2 = threshold * threshold;
  InlierSet out;
  out.mask.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool in = (m.apply(g.src[i]) - g.dst[i]).squaredNorm() <= t2;
    out.mask[i] = in;
    out.count += in ? 1 : 0;
  }
  return out;
}

std::optional<RigidMotion> fit_subset(const PairGeometry& g, std::span<const std::size_t> idx) {
  std::vector<Point3> p, q;
  p.reserve(idx.size());
  q.reserve(idx.size());
  for (std::size_t i : idx) {
    p.push_back(g.src[i]);
    q.push_back(g.dst[i]);
  }
  return kabsch(p, q);
}

Hypothesis local_optimize(const Hypothesis& best, const PairGeometry& g, const RansacConfig& cfg,
                          Rng& rng) {
  std::vector<std::size_t> pool;
  pool.reserve(best.inlier_count);
  for (std::size_t i = 0; i < best.inlier_mask.size(); ++i) {
    if (best.inlier_mask[i]) pool.push_back(i);
  }
  if (pool.size() < 4) return best;

  const std::size_t sample_size =
      std::min({cfg.lo_sample_cap, std::max<std::size_t>(4, pool.size() / 2), pool.size()});
  constexpr int kAnnealSteps = 4;

  Hypothesis result = best;
  std::vector<std::size_t> support;
  support.reserve(g.size());
  for (std::size_t it = 0; it < cfg.lo_inner_iterations; ++it) {
    // Partial Fisher-Yates: the first sample_size entries become the sample.
    for (std::size_t k = 0; k < sample_size; ++k) {
      const std::size_t j = k + rng.index(pool.size() - k);
      std::swap(pool[k], pool[j]);
    }
    auto model = fit_subset(g, std::span(pool).first(sample_size));
    if (!model) continue;

    for (int step = 0; step < kAnnealSteps; ++step) {
      const double thr = cfg.inlier_threshold * (2.0 - double(step) / double(kAnnealSteps - 1));
      const double t2 = thr * thr;
      support.clear();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if ((model->apply(g.src[i]) - g.dst[i]).squaredNorm() <= t2) support.push_back(i);
      }
      if (support.size() < 3) break;
      auto refit = fit_subset(g, support);
      if (!refit) break;
      model = refit;
    }

    const std::size_t count = count_within(*model, g, cfg.inlier_threshold);
    if (count > result.inlier_count) {
      InlierSet in = inliers_within(*model, g, cfg.inlier_threshold);
      result.motion = *model;
      result.inlier_count = in.count;
      result.inlier_mask = std::move(in.mask);
    }
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------

std::optional<RigidMotion> kabsch(std::span<const Point3> src, std::span<const Point3> dst,
                                  std::span<const double> weights) {
  if (src.size() != dst.size()) throw std::invalid_argument("kabsch: point count mismatch");
  if (src.size() < 3) throw std::invalid_argument("kabsch: at least 3 point pairs required");
  if (!weights.empty() && weights.size() != src.size()) {
    throw std::invalid_argument("kabsch: weight count mismatch");
  }

  double wsum = 0.0;
  Vector3 cp = Vector3::Zero(), cq = Vector3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0)) throw std::invalid_argument("kabsch: negative or NaN weight");
    wsum += w;
    cp += w * src[i];
    cq += w * dst[i];
  }
  if (!(wsum > 0.0)) return std::nullopt;
  cp /= wsum;
  cq /= wsum;

  Matrix3 h = Matrix3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    h += w * (src[i] - cp) * (dst[i] - cq).transpose();
  }

  Eigen::JacobiSVD<Matrix3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector3& s = svd.singularValues();
  if (!(s[0] > 0.0) || !std::isfinite(s[0]) || s[1] <= kDegenerateRatio * s[0]) {
    return std::nullopt;
  }
  const Matrix3 u = svd.matrixU();
  const Matrix3 v = svd.matrixV();
  Matrix3 d = Matrix3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Matrix3 r = v * d * u.transpose();
  return RigidMotion(r, cq - r * cp);
}

InlierSet count_inliers(const RigidMotion& motion, std::span<const Correspondence> corrs,
                        const PointCloud& src_cloud, const PointCloud& dst_cloud,
                        double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("count_inliers: threshold must be > 0");
  return inliers_within(motion, PairGeometry(corrs, src_cloud, dst_cloud), threshold);
}

std::size_t required_iterations(double confidence, double inlier_fraction,
                                std::size_t max_iterations, int sample_size) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("required_iterations: confidence must be in (0, 1)");
  }
  max_iterations = std::max<std::size_t>(1, max_iterations);
  if (inlier_fraction >= 1.0) return 1;
  if (!(inlier_fraction > 0.0)) return max_iterations;

  const double all_inlier = std::pow(inlier_fraction, sample_size);
  const double denom = std::log1p(-all_inlier);
  if (!(denom < 0.0)) return max_iterations;
  const double k = std::ceil(std::log1p(-confidence) / denom);
  if (!(k < static_cast<double>(max_iterations))) return max_iterations;
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

bool elc_check(const std::array<Point3, 3>& src, const std::array<Point3, 3>& dst,
               double tolerance) {
  constexpr int kEdges[3][2] = {{0, 1}, {1, 2}, {0, 2}};
  for (const auto& e : kEdges) {
    const double ls = (src[e[0]] - src[e[1]]).norm();
    const double ld = (dst[e[0]] - dst[e[1]]).norm();
    if (!(std::abs(ls - ld) <= tolerance)) return false;
  }
  return true;
}

bool elc_check(std::span<const Correspondence, 3> sample, const PointCloud& src_cloud,
               const PointCloud& dst_cloud, double tolerance) {
  std::array<Point3, 3> p, q;
  for (int i = 0; i < 3; ++i) {
    p[i] = src_cloud.points.at(sample[i].src);
    q[i] = dst_cloud.points.at(sample[i].dst);
  }
  return elc_check(p, q, tolerance);
}

// ---------------------------------------------------------------------------

double sprt_threshold(double epsilon, double delta, double model_time,
                      double models_per_sample) {
  if (!(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("sprt_threshold: epsilon and delta must lie in (0, 1)");
  }
  if (!(model_time > 0.0 && models_per_sample > 0.0)) {
    throw std::invalid_argument("sprt_threshold: model_time and models_per_sample must be > 0");
  }
  const double c = (1.0 - delta) * std::log((1.0 - delta) / (1.0 - epsilon)) +
                   delta * std::log(delta / epsilon);
  const double a = model_time * c / models_per_sample + 1.0;
  double an = a;
  for (int i = 0; i < 200; ++i) {
    const double next = a + std::log(an);
    if (std::abs(next - an) <= 1e-14 * next) {
      an = next;
      break;
    }
    an = next;
  }
  return an;
}

SprtState::SprtState(const SprtParams& p)
    : params(p),
      epsilon(p.epsilon),
      delta(p.delta),
      threshold(sprt_threshold(p.epsilon, p.delta, p.model_time, p.models_per_sample)) {}

void SprtState::on_new_best(std::size_t inliers, std::size_t total) {
  best_inliers = std::max(best_inliers, inliers);
  if (total == 0) return;
  const double estimate = std::min(0.999, double(inliers) / double(total));
  if (estimate <= delta || estimate <= epsilon) return;
  epsilon = estimate;
  threshold = sprt_threshold(epsilon, delta, params.model_time, params.models_per_sample);
}

namespace {

SprtOutcome sprt_run(const RigidMotion& motion, const PairGeometry& g, double inlier_threshold,
                     SprtState& state) {
  const double t2 = inlier_threshold * inlier_threshold;
  const double up_in = state.delta / state.epsilon;
  const double up_out = (1.0 - state.delta) / (1.0 - state.epsilon);
  double lambda = 1.0;

  SprtOutcome out;
  out.inliers.mask.assign(g.size(), false);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool in = (motion.apply(g.src[i]) - g.dst[i]).squaredNorm() <= t2;
    out.inliers.mask[i] = in;
    out.inliers.count += in ? 1 : 0;
    lambda *= in ? up_in : up_out;
    if (lambda > state.threshold) {
      out.decision = SprtDecision::reject_early;
      out.evaluated = i + 1;
      return out;
    }
  }
  out.evaluated = g.size();
  if (out.inliers.count > state.best_inliers) state.on_new_best(out.inliers.count, g.size());
  return out;
}

}  // namespace

SprtOutcome sprt_evaluate(const RigidMotion& motion, std::span<const Correspondence> corrs,
                          const PointCloud& src_cloud, const PointCloud& dst_cloud,
                          double inlier_threshold, SprtState& state) {
  return sprt_run(motion, PairGeometry(corrs, src_cloud, dst_cloud), inlier_threshold, state);
}

// ---------------------------------------------------------------------------

namespace {

double prosac_initial_tn(std::size_t n_items, std::size_t growth_max, int m) {
  double tn = static_cast<double>(growth_max);
  for (int i = 0; i < m; ++i) {
    tn *= static_cast<double>(m - i) / static_cast<double>(n_items - i);
  }
  return tn;
}

}  // namespace

std::vector<std::size_t> prosac_growth_schedule(std::size_t n_items, std::size_t growth_max,
                                                int sample_size) {
  const auto m = static_cast<std::size_t>(sample_size);
  if (n_items < m) throw std::invalid_argument("prosac: fewer items than the sample size");
  std::vector<std::size_t> out{1};
  double tn = prosac_initial_tn(n_items, growth_max, sample_size);
  for (std::size_t n = m; n < n_items; ++n) {
    const double next = tn * double(n + 1) / double(n + 1 - m);
    out.push_back(out.back() + static_cast<std::size_t>(std::ceil(next - tn)));
    tn = next;
  }
  return out;
}

ProsacSampler::ProsacSampler(std::size_t n_items, std::size_t growth_max, int sample_size)
    : n_items_(n_items), m_(sample_size), n_(static_cast<std::size_t>(sample_size)) {
  if (sample_size != 3) throw std::invalid_argument("ProsacSampler: sample size must be 3");
  if (n_items < n_) throw std::invalid_argument("prosac: fewer items than the sample size");
  tn_ = prosac_initial_tn(n_items, growth_max, m_);
}

std::array<std::size_t, 3> ProsacSampler::next(Rng& rng) {
  ++t_;
  if (t_ > tn_prime_ && n_ < n_items_) {
    const double next = tn_ * double(n_ + 1) / double(n_ + 1 - std::size_t(m_));
    tn_prime_ += static_cast<std::size_t>(std::ceil(next - tn_));
    tn_ = next;
    ++n_;
  }
  if (tn_prime_ < t_) return uniform_sample(n_, rng);

  // Newest item plus two from the ones ranked above it.
  std::array<std::size_t, 3> s{n_ - 1, 0, 0};
  if (n_ - 1 == 2) {
    s[1] = 0;
    s[2] = 1;
    return s;
  }
  s[1] = rng.index(n_ - 1);
  do {
    s[2] = rng.index(n_ - 1);
  } while (s[2] == s[1]);
  return s;
}

std::array<std::size_t, 3> uniform_sample(std::size_t n, Rng& rng) {
  if (n < 3) throw std::invalid_argument("uniform_sample: need at least 3 items");
  std::array<std::size_t, 3> s{};
  s[0] = rng.index(n);
  do {
    s[1] = rng.index(n);
  } while (s[1] == s[0]);
  do {
    s[2] = rng.index(n);
  } while (s[2] == s[0] || s[2] == s[1]);
  return s;
}

// ---------------------------------------------------------------------------

void RansacConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("RansacConfig: max_iterations must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("RansacConfig: confidence must be in (0, 1)");
  }
  if (!(inlier_threshold > 0.0)) {
    throw std::invalid_argument("RansacConfig: inlier_threshold must be > 0");
  }
  if (!(elc_tolerance >= 0.0)) throw std::invalid_argument("RansacConfig: elc_tolerance < 0");
  if (lo_sample_cap < 4) throw std::invalid_argument("RansacConfig: lo_sample_cap must be >= 4");
  if (rejection == RejectionKind::sprt) {
    // Validates epsilon/delta ranges.
    (void)sprt_threshold(sprt.epsilon, sprt.delta, sprt.model_time, sprt.models_per_sample);
  }
}

Hypothesis lo_step(const Hypothesis& best, std::span<const Correspondence> corrs,
                   const PointCloud& src_cloud, const PointCloud& dst_cloud,
                   const RansacConfig& cfg, Rng& rng) {
  if (best.inlier_mask.size() != corrs.size()) {
    throw std::invalid_argument("lo_step: inlier mask does not match the correspondences");
  }
  return local_optimize(best, PairGeometry(corrs, src_cloud, dst_cloud), cfg, rng);
}

RegistrationResult ransac_register(const PointCloud& src_cloud, const PointCloud& dst_cloud,
                                   std::span<const Correspondence> corrs,
                                   const RansacConfig& cfg) {
  cfg.validate();
  if (corrs.size() < 3) {
    throw std::invalid_argument("ransac_register: at least 3 correspondences required, got " +
                                std::to_string(corrs.size()));
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = corrs.size();

  // Work in ranked order; PROSAC needs it and uniform sampling ignores it.
  std::vector<std::size_t> order;
  if (cfg.sampler == SamplerKind::prosac) {
    order = priority_order(corrs);
  } else {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  std::vector<Correspondence> ranked;
  ranked.reserve(n);
  for (std::size_t i : order) ranked.push_back(corrs[i]);
  const PairGeometry g(ranked, src_cloud, dst_cloud);

  Rng rng(cfg.seed);
  std::optional<ProsacSampler> prosac;
  if (cfg.sampler == SamplerKind::prosac) prosac.emplace(n, cfg.prosac_growth_max);
  std::optional<SprtState> sprt;
  if (cfg.rejection == RejectionKind::sprt) sprt.emplace(cfg.sprt);

  RegistrationResult result;
  Hypothesis best;
  std::size_t required = cfg.max_iterations;
  std::size_t iter = 0;

  while (iter < required) {
    ++iter;
    const std::array<std::size_t, 3> s = prosac ? prosac->next(rng) : uniform_sample(n, rng);
    const std::array<Point3, 3> p{g.src[s[0]], g.src[s[1]], g.src[s[2]]};
    const std::array<Point3, 3> q{g.dst[s[0]], g.dst[s[1]], g.dst[s[2]]};

    if (cfg.rejection == RejectionKind::elc && !elc_check(p, q, cfg.elc_tolerance)) {
      ++result.hypotheses_rejected_fast;
      continue;
    }
    const auto model = kabsch(p, q);
    if (!model) {
      ++result.hypotheses_rejected_fast;
      continue;
    }

    std::size_t count;
    std::optional<InlierSet> inliers;
    if (sprt) {
      SprtOutcome outcome = sprt_run(*model, g, cfg.inlier_threshold, *sprt);
      if (outcome.decision == SprtDecision::reject_early) {
        ++result.hypotheses_rejected_fast;
        continue;
      }
      count = outcome.inliers.count;
      inliers = std::move(outcome.inliers);
    } else {
      count = count_within(*model, g, cfg.inlier_threshold);
    }
    if (count <= best.inlier_count) continue;

    if (!inliers) inliers = inliers_within(*model, g, cfg.inlier_threshold);
    best.motion = *model;
    best.sample = s;
    best.inlier_count = inliers->count;
    best.inlier_mask = std::move(inliers->mask);
    result.found_model = true;
    result.best_trace.push_back({iter, best.inlier_count, best.motion, false});

    if (cfg.use_lo && result.lo_rounds < cfg.lo_max_rounds && best.inlier_count >= 4) {
      ++result.lo_rounds;
      Hypothesis improved = local_optimize(best, g, cfg, rng);
      if (improved.inlier_count > best.inlier_count) {
        best = std::move(improved);
        result.best_trace.push_back({iter, best.inlier_count, best.motion, true});
      }
    }
    if (sprt) sprt->on_new_best(best.inlier_count, n);
    required = required_iterations(cfg.confidence, double(best.inlier_count) / double(n),
                                   cfg.max_iterations);
  }

  result.iterations_run = iter;
  result.converged_by =
      required < cfg.max_iterations ? StopReason::early_stop : StopReason::iteration_cap;
  result.inlier_mask.assign(n, false);
  if (result.found_model) {
    result.motion = best.motion;
    result.inlier_count = best.inlier_count;
    for (std::size_t k = 0; k < n; ++k) result.inlier_mask[order[k]] = best.inlier_mask[k];
  }
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace pcreg
