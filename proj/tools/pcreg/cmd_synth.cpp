#include "pcreg/cli.hpp"

#include <pcreg/io.hpp>
#include <pcreg/synth.hpp>

#include <cstdio>
#include <memory>

namespace pcreg::cli {
namespace {

struct SceneOptions {
  std::string out_dir;
  std::size_t count = 1;
  SceneSpec spec;
  double max_angle = 30.0;
  double max_translation = 10.0;
  bool identity = false;
  std::string format = "bin";
  std::uint64_t seed = 0;
};

struct TrajectoryOptions {
  std::string out_dir;
  std::size_t sequences = 1;
  std::string model = "drive";
  TrajectorySpec spec;
  std::string format = "bin";
  std::uint64_t seed = 0;
};

void write_cloud(const std::filesystem::path& base, const PointCloud& cloud,
                 const std::string& format) {
  if (format == "ply") {
    write_ply(base.string() + ".ply", cloud);
  } else {
    write_kitti_bin(base.string() + ".bin", cloud);
  }
}

int run_scene(const SceneOptions& o, Context&) {
  namespace fs = std::filesystem;
  const fs::path root(o.out_dir);
  std::vector<PairRecord> pairs;
  for (std::size_t k = 0; k < o.count; ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "scene%04zu", k);
    SceneSpec spec = o.spec;
    spec.seed = derive_seed(o.seed, 2 * k);
    Rng rng(derive_seed(o.seed, 2 * k + 1));
    spec.true_motion = o.identity ? RigidMotion::identity()
                                  : random_motion(rng, o.max_angle, o.max_translation);
    const Scene scene = generate_scene(spec);

    write_cloud(frame_path(root / "clouds", id, 0, ""), scene.src, o.format);
    write_cloud(frame_path(root / "clouds", id, 1, ""), scene.dst, o.format);
    write_descriptors(frame_path(root / "desc", id, 0, ".fdsc"), scene.src_desc);
    write_descriptors(frame_path(root / "desc", id, 1, ".fdsc"), scene.dst_desc);
    pairs.push_back({id, 0, 1, scene.true_motion, spec.inlier_fraction, 0.0});
  }
  write_pair_list(root / "pairs.csv", pairs);
  return kOk;
}

int run_trajectory(const TrajectoryOptions& o, Context&) {
  namespace fs = std::filesystem;
  const fs::path root(o.out_dir);
  for (std::size_t k = 0; k < o.sequences; ++k) {
    char id[16];
    std::snprintf(id, sizeof id, "%02zu", k);
    TrajectorySpec spec = o.spec;
    spec.sequence_id = id;
    spec.seed = derive_seed(o.seed, k);
    spec.model = o.model == "stationary" ? TrajectoryModel::stationary
                 : o.model == "straight" ? TrajectoryModel::straight
                 : o.model == "uturn"    ? TrajectoryModel::uturn
                                         : TrajectoryModel::drive;
    const Trajectory t = generate_trajectory(spec);

    std::vector<RigidMotion> poses;
    std::string times;
    for (const auto& f : t.sequence.frames) {
      poses.push_back(f.pose);
      times += format_real(f.timestamp) + '\n';
      write_cloud(frame_path(root / "clouds", id, f.frame_index, ""), *f.cloud, o.format);
    }
    write_file(root / "poses" / (std::string(id) + ".txt"), format_poses(poses));
    write_file(root / "times" / (std::string(id) + ".txt"), times);
  }
  return kOk;
}

}  // namespace

void add_synth_command(CLI::App& app, Context& ctx) {
  CLI::App* sub = app.add_subcommand("synth", "Write synthetic scenes or trajectories");
  sub->require_subcommand(1);

  auto s = std::make_shared<SceneOptions>();
  CLI::App* scene = sub->add_subcommand(
      "scene", "Correspondence scenes: clouds/, desc/ and pairs.csv (overlap column = inlier fraction)");
  add_config_option(*scene);
  scene->add_option("--out-dir", s->out_dir)->required();
  scene->add_option("--count", s->count, "Number of scenes")->capture_default_str();
  scene->add_option("--points", s->spec.n_points)->capture_default_str();
  scene->add_option("--inlier-fraction", s->spec.inlier_fraction)->capture_default_str();
  scene->add_option("--noise", s->spec.noise_sigma, "Target noise sigma, meters")->capture_default_str();
  scene->add_option("--extent", s->spec.extent, "Half-width of the source box, meters")
      ->capture_default_str();
  scene->add_option("--outlier-offset", s->spec.outlier_min_offset)->capture_default_str();
  scene->add_option("--dim", s->spec.descriptor_dim, "Descriptor dimension")->capture_default_str();
  scene->add_option("--quality", s->spec.quality_correlation,
                    "Correlation of match scores with inlier labels, 0..1")
      ->capture_default_str();
  scene->add_option("--clusters", s->spec.outlier_clusters, "Outlier source clusters (0: uniform)")
      ->capture_default_str();
  scene->add_option("--cluster-radius", s->spec.outlier_cluster_radius)->capture_default_str();
  scene->add_option("--max-angle", s->max_angle, "Degrees")->capture_default_str();
  scene->add_option("--max-translation", s->max_translation, "Meters per axis")->capture_default_str();
  scene->add_flag("--identity", s->identity, "Use the identity as the true motion");
  scene->add_option("--format", s->format)->check(CLI::IsMember({"bin", "ply"}))->capture_default_str();
  scene->add_option("--seed", s->seed)->capture_default_str();
  scene->callback([s, &ctx] { ctx.exit_code = run_scene(*s, ctx); });

  auto t = std::make_shared<TrajectoryOptions>();
  CLI::App* traj = sub->add_subcommand("trajectory", "Posed sequences: poses/, times/ and clouds/");
  add_config_option(*traj);
  traj->add_option("--out-dir", t->out_dir)->required();
  traj->add_option("--sequences", t->sequences)->capture_default_str();
  traj->add_option("--model", t->model)
      ->check(CLI::IsMember({"stationary", "straight", "uturn", "drive"}))
      ->capture_default_str();
  traj->add_option("--frames", t->spec.n_frames)->capture_default_str();
  traj->add_option("--spacing", t->spec.frame_spacing, "Meters per frame")->capture_default_str();
  traj->add_option("--dt", t->spec.frame_dt, "Seconds per frame")->capture_default_str();
  traj->add_option("--turn-radius", t->spec.turn_radius)->capture_default_str();
  traj->add_option("--yaw-rate", t->spec.max_yaw_rate, "Max degrees per frame")->capture_default_str();
  traj->add_option("--attitude-sigma", t->spec.attitude_sigma, "Roll/pitch sigma, degrees")
      ->capture_default_str();
  traj->add_option("--range", t->spec.sensor_range)->capture_default_str();
  traj->add_option("--density", t->spec.point_density, "World points per square meter")
      ->capture_default_str();
  traj->add_option("--format", t->format)->check(CLI::IsMember({"bin", "ply"}))->capture_default_str();
  traj->add_option("--seed", t->seed)->capture_default_str();
  traj->callback([t, &ctx] { ctx.exit_code = run_trajectory(*t, ctx); });
}

}  // namespace pcreg::cli
