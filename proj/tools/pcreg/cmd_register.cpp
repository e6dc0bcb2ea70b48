#include "pcreg/cli.hpp"
#include "pcreg/pipeline.hpp"
#include "pcreg/records.hpp"

#include <pcreg/benchgen.hpp>
#include <pcreg/io.hpp>
#include <pcreg/metrics.hpp>

#include <atomic>
#include <memory>
#include <optional>
#include <thread>

namespace pcreg::cli {
namespace {

struct RegisterOptions {
  // Single pair
  std::string src_cloud, dst_cloud, src_desc, dst_desc, gt;
  // Pair list
  std::string pairs, cloud_dir, desc_dir;
  std::string out;

  std::string filter = "gpf";
  double gpf_phi = 2.0;
  int gpf_grid = 10;
  std::size_t gpf_max = 0;
  std::size_t max_iters = 1'000'000;
  double confidence = 0.999;
  double inlier_thresh = 0.6;
  double elc_tol = 0.6;
  std::string sampler = "prosac";
  std::string reject = "elc";
  std::string lo = "on";
  std::uint64_t seed = 0;
  std::string refine = "none";
  double icp_thresh = 0.6;
  std::size_t icp_iters = 30;
  std::size_t threads = 1;
  std::string timing = "on";
};

PipelineConfig pipeline_config(const RegisterOptions& o) {
  PipelineConfig c;
  c.filter = o.filter == "none" ? FilterKind::none
             : o.filter == "mnn" ? FilterKind::mnn
                                 : FilterKind::gpf;
  c.gpf.phi = o.gpf_phi;
  c.gpf.grid_m = o.gpf_grid;
  if (o.gpf_max > 0) c.gpf.max_pairs = o.gpf_max;
  c.ransac.max_iterations = o.max_iters;
  c.ransac.confidence = o.confidence;
  c.ransac.inlier_threshold = o.inlier_thresh;
  c.ransac.elc_tolerance = o.elc_tol;
  c.ransac.sampler = o.sampler == "uniform" ? SamplerKind::uniform : SamplerKind::prosac;
  c.ransac.rejection = o.reject == "none"  ? RejectionKind::none
                       : o.reject == "sprt" ? RejectionKind::sprt
                                            : RejectionKind::elc;
  c.ransac.use_lo = o.lo == "on";
  c.refine = o.refine == "icp";
  c.icp.threshold = o.icp_thresh;
  c.icp.max_iterations = o.icp_iters;
  c.ransac.validate();
  c.icp.validate();
  return c;
}

struct Job {
  std::string sequence_id;
  std::size_t src = 0, tgt = 0;
  std::optional<RigidMotion> gt;
  std::optional<double> overlap, dt;
  // Either explicit files or dataset directories.
  std::string src_cloud, dst_cloud, src_desc, dst_desc;
};

struct JobResult {
  std::optional<ResultRecord> record;
  std::string error;
};

void fill_stage_metrics(StageRecord& s, const RigidMotion& est, const std::optional<RigidMotion>& gt) {
  if (!gt) return;
  const EvalRecord e = evaluate(est, *gt);
  s.re_deg = e.re_deg;
  s.te_m = e.te_m;
  s.success = e.success;
}

ResultRecord make_record(const Job& job, const PipelineResult& r, std::size_t n_src, bool timing) {
  ResultRecord rec;
  rec.sequence_id = job.sequence_id;
  rec.src = job.src;
  rec.tgt = job.tgt;
  rec.overlap = job.overlap;
  rec.dt = job.dt;
  if (job.gt) {
    const RigidMotion rel = inverse(*job.gt);
    rec.distance = rel.translation().norm();
    try {
      const EulerAngles e = to_euler(rel.rotation());
      rec.roll = e.roll;
      rec.pitch = e.pitch;
      rec.yaw = e.yaw;
    } catch (const GimbalLockError&) {
      // Angles stay absent; eval skips them.
    }
  }
  rec.n_corrs = r.n_corrs;
  rec.n_filtered = r.n_filtered;
  rec.gpf_fallback = r.gpf_fallback;

  rec.coarse.iterations = r.coarse.iterations_run;
  rec.coarse.inliers = r.coarse.inlier_count;
  rec.coarse.status = r.coarse.found_model ? (r.coarse.converged_by == StopReason::early_stop
                                                  ? "early_stop"
                                                  : "iteration_cap")
                                           : "no_model";
  if (timing) rec.coarse.wall_time = r.coarse_time;
  fill_stage_metrics(rec.coarse, r.coarse.motion, job.gt);

  if (r.refined) {
    StageRecord s;
    s.iterations = r.refined->iterations;
    s.inliers = static_cast<std::size_t>(std::llround(r.refined->fitness * double(n_src)));
    s.status = to_string(r.refined->status);
    s.rmse = r.refined->rmse;
    s.fitness = r.refined->fitness;
    if (timing) s.wall_time = r.total_time;
    fill_stage_metrics(s, r.refined->motion, job.gt);
    rec.refined = s;
  }
  rec.motion = r.motion;
  return rec;
}

JobResult run_job(const Job& job, const RegisterOptions& o, const PipelineConfig& base,
                  std::size_t index) {
  JobResult out;
  try {
    PointCloud src, dst;
    DescriptorSet sd, dd;
    if (!job.src_cloud.empty()) {
      src = read_cloud(job.src_cloud);
      dst = read_cloud(job.dst_cloud);
      sd = read_descriptors(job.src_desc);
      dd = read_descriptors(job.dst_desc);
    } else {
      src = load_frame_cloud(o.cloud_dir, job.sequence_id, job.src);
      dst = load_frame_cloud(o.cloud_dir, job.sequence_id, job.tgt);
      sd = read_descriptors(frame_path(o.desc_dir, job.sequence_id, job.src, ".fdsc"));
      dd = read_descriptors(frame_path(o.desc_dir, job.sequence_id, job.tgt, ".fdsc"));
    }
    PipelineConfig cfg = base;
    cfg.ransac.seed = derive_seed(o.seed, index);
    const PipelineResult r = run_pipeline(src, dst, sd, dd, cfg);
    out.record = make_record(job, r, src.size(), o.timing == "on");
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

int run_register(const RegisterOptions& o, Context& ctx) {
  const PipelineConfig cfg = pipeline_config(o);

  std::vector<Job> jobs;
  if (!o.pairs.empty()) {
    if (o.cloud_dir.empty() || o.desc_dir.empty()) {
      ctx.err << "error: --pairs requires --cloud-dir and --desc-dir\n";
      return kUsage;
    }
    for (const PairRecord& p : read_pair_list(o.pairs)) {
      Job j;
      j.sequence_id = p.sequence_id;
      j.src = p.src;
      j.tgt = p.tgt;
      j.gt = p.gt;
      j.overlap = p.overlap;
      j.dt = p.dt;
      jobs.push_back(std::move(j));
    }
  } else {
    if (o.src_cloud.empty() || o.dst_cloud.empty() || o.src_desc.empty() || o.dst_desc.empty()) {
      ctx.err << "error: give --pairs, or all of --src-cloud --dst-cloud --src-desc --dst-desc\n";
      return kUsage;
    }
    Job j;
    j.sequence_id = "pair";
    j.tgt = 1;
    j.src_cloud = o.src_cloud;
    j.dst_cloud = o.dst_cloud;
    j.src_desc = o.src_desc;
    j.dst_desc = o.dst_desc;
    if (!o.gt.empty()) {
      const auto poses = read_poses(o.gt);
      if (poses.size() != 1) {
        throw FormatError(FormatErrorKind::invalid, o.gt, 0, "expected exactly one motion");
      }
      j.gt = poses.front();
    }
    jobs.push_back(std::move(j));
  }

  std::vector<JobResult> results(jobs.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(o.threads, jobs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = run_job(jobs[i], o, cfg, i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          results[i] = run_job(jobs[i], o, cfg, i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::string text;
  bool failed = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].record) {
      text += to_json_line(*results[i].record);
      text.push_back('\n');
    } else {
      failed = true;
      ctx.err << "error: pair " << jobs[i].sequence_id << " " << jobs[i].src << "->"
              << jobs[i].tgt << ": " << results[i].error << '\n';
    }
  }
  emit(o.out, text, ctx.out);
  return failed ? kDataError : kOk;
}

}  // namespace

void add_register_command(CLI::App& app, Context& ctx) {
  auto opts = std::make_shared<RegisterOptions>();
  CLI::App* sub = app.add_subcommand("register", "Register one pair or every pair of a pair list");
  add_config_option(*sub);

  sub->add_option("--src-cloud", opts->src_cloud, "Source cloud (.bin or .ply)");
  sub->add_option("--dst-cloud", opts->dst_cloud, "Target cloud (.bin or .ply)");
  sub->add_option("--src-desc", opts->src_desc, "Source descriptors (.fdsc)");
  sub->add_option("--dst-desc", opts->dst_desc, "Target descriptors (.fdsc)");
  sub->add_option("--gt", opts->gt, "Ground-truth motion: one line of 12 numbers");
  sub->add_option("--pairs", opts->pairs, "Pair-list CSV");
  sub->add_option("--cloud-dir", opts->cloud_dir, "Clouds as <dir>/<seq>/<frame:06d>.{bin,ply}");
  sub->add_option("--desc-dir", opts->desc_dir, "Descriptors as <dir>/<seq>/<frame:06d>.fdsc");
  sub->add_option("--out", opts->out, "JSON-lines output (default: stdout)");

  sub->add_option("--filter", opts->filter, "Match filter")
      ->check(CLI::IsMember({"none", "mnn", "gpf"}))
      ->capture_default_str();
  sub->add_option("--gpf", opts->gpf_phi, "GPF factor: keep about phi * #mutual matches")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--gpf-grid", opts->gpf_grid, "GPF cells per side")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  sub->add_option("--gpf-max", opts->gpf_max, "Absolute GPF target; overrides --gpf when > 0");
  sub->add_option("--max-iters", opts->max_iters, "RANSAC iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--confidence", opts->confidence, "RANSAC confidence")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--inlier-thresh", opts->inlier_thresh, "Inlier distance, meters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--elc-tol", opts->elc_tol, "Edge-length tolerance, meters")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--sampler", opts->sampler)
      ->check(CLI::IsMember({"uniform", "prosac"}))
      ->capture_default_str();
  sub->add_option("--reject", opts->reject, "Fast hypothesis rejection")
      ->check(CLI::IsMember({"none", "elc", "sprt"}))
      ->capture_default_str();
  sub->add_option("--lo", opts->lo, "Local optimization")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  sub->add_option("--seed", opts->seed)->capture_default_str();
  sub->add_option("--refine", opts->refine)
      ->check(CLI::IsMember({"none", "icp"}))
      ->capture_default_str();
  sub->add_option("--icp-thresh", opts->icp_thresh, "ICP correspondence gate, meters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--icp-iters", opts->icp_iters)->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--threads", opts->threads, "Pairs processed in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--timing", opts->timing, "Report wall times (off: byte-reproducible output)")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();

  sub->callback([opts, &ctx] { ctx.exit_code = run_register(*opts, ctx); });
}

}  // namespace pcreg::cli
