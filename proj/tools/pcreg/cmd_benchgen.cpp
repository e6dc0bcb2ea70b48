#include "pcreg/cli.hpp"

#include <pcreg/benchgen.hpp>
#include <pcreg/io.hpp>
#include <pcreg/metrics.hpp>

#include <algorithm>
#include <memory>
#include <sstream>

namespace pcreg::cli {
namespace {

struct BenchgenOptions {
  std::string poses_dir, clouds_dir, times_dir;
  std::string out, dist_dir, split;
  double frame_dt = 0.1;
  double voxel = 0.3;
  SelectorConfig sel;
};

std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("--split: not a number: '" + item + "'");
    }
  }
  return out;
}

std::string count_csv(const std::vector<CountBin>& bins) {
  std::string s = "bin_lo,bin_hi,count\n";
  for (const auto& b : bins) {
    s += format_real(b.lo) + ',' + format_real(b.hi) + ',' + std::to_string(b.count) + '\n';
  }
  return s;
}

std::vector<Sequence> load_sequences(const BenchgenOptions& o) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(o.poses_dir)) {
    throw FormatError(FormatErrorKind::io, o.poses_dir, 0, "pose directory not found");
  }
  std::vector<fs::path> pose_files;
  for (const auto& entry : fs::directory_iterator(o.poses_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      pose_files.push_back(entry.path());
    }
  }
  std::sort(pose_files.begin(), pose_files.end());

  std::vector<Sequence> seqs;
  for (const auto& pf : pose_files) {
    Sequence s;
    s.id = pf.stem().string();
    const auto poses = read_poses(pf);
    std::vector<double> times;
    if (!o.times_dir.empty()) {
      const fs::path tf = fs::path(o.times_dir) / (s.id + ".txt");
      times = read_times(tf);
      if (times.size() != poses.size()) {
        throw FormatError(FormatErrorKind::invalid, tf.string(), 0,
                          std::to_string(times.size()) + " timestamps for " +
                              std::to_string(poses.size()) + " poses");
      }
    }
    for (std::size_t i = 0; i < poses.size(); ++i) {
      PosedFrame f;
      f.frame_index = i;
      f.timestamp = times.empty() ? double(i) * o.frame_dt : times[i];
      f.pose = poses[i];
      PointCloud cloud = load_frame_cloud(o.clouds_dir, s.id, i);
      if (o.voxel > 0.0) cloud = voxel_downsample(cloud, o.voxel);
      f.cloud = std::make_shared<const PointCloud>(std::move(cloud));
      s.frames.push_back(std::move(f));
    }
    seqs.push_back(std::move(s));
  }
  return seqs;
}

int run_benchgen(const BenchgenOptions& o, Context& ctx) {
  o.sel.validate();
  const std::vector<Sequence> seqs = load_sequences(o);
  if (seqs.empty()) {
    ctx.err << "error: no pose files (*.txt) in " << o.poses_dir << '\n';
    return kDataError;
  }

  const std::vector<CandidatePair> pool = build_candidate_pool(seqs, o.sel);
  if (pool.empty()) {
    ctx.err << "error: pool empty: no source frame has a target with overlap > "
            << o.sel.min_overlap << " (tau " << o.sel.overlap_tau << " m)\n";
    return kNoResult;
  }
  const SelectionResult sel = select_balanced(pool, o.sel);
  if (!sel.complete) {
    ctx.err << "warning: selected " << sel.selected.size() << " of " << o.sel.target_count
            << " pairs (pool of " << pool.size() << " candidates, " << sel.attempts
            << " draws)\n";
  }

  std::vector<PairRecord> records;
  std::vector<PairParameters> params;
  std::vector<std::size_t> seq_of;
  for (const Selection& s : sel.selected) {
    const CandidatePair& c = pool[s.candidate];
    records.push_back(to_pair_record(c));
    seq_of.push_back(c.sequence);
    PairParameters p;
    p.distance = c.distance;
    p.time_offset = c.dt;
    p.overlap = c.overlap;
    p.roll = c.motion.roll;
    p.pitch = c.motion.pitch;
    p.yaw = c.motion.yaw;
    params.push_back(p);
  }
  emit(o.out, format_pair_list(records), ctx.out);

  if (!o.dist_dir.empty() && !params.empty()) {
    for (const auto& h : set_distribution_report(params)) {
      write_file(std::filesystem::path(o.dist_dir) / ("dist_" + std::string(to_string(h.parameter)) + ".csv"),
                 count_csv(h.bins));
    }
  }

  if (!o.split.empty()) {
    if (o.out.empty()) {
      ctx.err << "error: --split requires --out\n";
      return kUsage;
    }
    const std::vector<double> ratios = parse_ratios(o.split);
    std::vector<std::string> ids;
    for (const auto& s : seqs) ids.push_back(s.id);
    const auto split_of = split_by_sequence(ids, ratios, o.sel.seed);
    static const char* kNames[] = {"train", "val", "test"};
    const std::filesystem::path out(o.out);
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      std::vector<PairRecord> part;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (split_of[seq_of[i]] == k) part.push_back(records[i]);
      }
      const std::string name = ratios.size() == 3 ? kNames[k] : "split" + std::to_string(k);
      write_pair_list(out.parent_path() / (out.stem().string() + "_" + name + out.extension().string()),
                      part);
    }
  }
  return kOk;
}

}  // namespace

void add_benchgen_command(CLI::App& app, Context& ctx) {
  auto o = std::make_shared<BenchgenOptions>();
  CLI::App* sub = app.add_subcommand("benchgen", "Select a motion-balanced set of frame pairs");
  add_config_option(*sub);

  sub->add_option("--poses-dir", o->poses_dir, "One <seq>.txt pose file per sequence")->required();
  sub->add_option("--clouds-dir", o->clouds_dir, "Clouds as <dir>/<seq>/<frame:06d>.{bin,ply}")
      ->required();
  sub->add_option("--times-dir", o->times_dir, "Optional <seq>.txt timestamp files");
  sub->add_option("--frame-dt", o->frame_dt, "Seconds per frame when no timestamps are given")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--voxel", o->voxel, "Voxel size before overlap computation (0: off)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--k", o->sel.k, "Source frame stride")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--min-overlap", o->sel.min_overlap)->capture_default_str();
  sub->add_option("--radius", o->sel.r, "Radius in the normalized motion cube")->capture_default_str();
  sub->add_option("--count", o->sel.target_count, "Pairs to select")->capture_default_str();
  sub->add_option("--overlap-tau", o->sel.overlap_tau, "Overlap distance, meters")->capture_default_str();
  sub->add_option("--seed", o->sel.seed)->capture_default_str();
  sub->add_option("--threads", o->sel.threads, "Threads for overlap computation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out", o->out, "Pair-list CSV (default: stdout)");
  sub->add_option("--dist-dir", o->dist_dir, "Directory for dist_<parameter>.csv histograms");
  sub->add_option("--split", o->split, "Comma-separated ratios; writes <out>_train/val/test.csv");

  sub->callback([o, &ctx] { ctx.exit_code = run_benchgen(*o, ctx); });
}

}  // namespace pcreg::cli
