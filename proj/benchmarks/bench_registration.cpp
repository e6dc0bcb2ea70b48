#include <pcreg/estimate.hpp>
#include <pcreg/filter.hpp>
#include <pcreg/match.hpp>
#include <pcreg/refine.hpp>
#include <pcreg/synth.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace pcreg;

Scene make_scene(std::size_t n, double inlier_fraction, std::uint64_t seed = 1) {
  Rng rng(seed);
  SceneSpec spec;
  spec.n_points = n;
  spec.inlier_fraction = inlier_fraction;
  spec.true_motion = random_motion(rng, 180.0, 20.0);
  spec.seed = seed;
  return generate_scene(spec);
}

void BM_KabschMinimal(benchmark::State& state) {
  const Scene s = make_scene(64, 1.0);
  const std::array<Point3, 3> src{s.src[0], s.src[1], s.src[2]};
  const std::array<Point3, 3> dst{s.dst[0], s.dst[1], s.dst[2]};
  for (auto _ : state) benchmark::DoNotOptimize(kabsch(src, dst));
}
BENCHMARK(BM_KabschMinimal);

void BM_MatchFeatures(benchmark::State& state) {
  const Scene s = make_scene(std::size_t(state.range(0)), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(match_features(s.src_desc, s.dst_desc));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MatchFeatures)->Arg(500)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_Gpf(benchmark::State& state) {
  const Scene s = make_scene(std::size_t(state.range(0)), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(gpf(s.src, s.corrs, GpfConfig{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gpf)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

// Args: inlier percentage, rejection (0 none, 1 elc, 2 sprt).
void BM_Ransac(benchmark::State& state) {
  const Scene s = make_scene(1000, double(state.range(0)) / 100.0);
  RansacConfig cfg;
  cfg.rejection = static_cast<RejectionKind>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ransac_register(s.src, s.dst, s.corrs, cfg));
}
BENCHMARK(BM_Ransac)
    ->ArgsProduct({{10, 20, 50}, {0, 1, 2}})
    ->Unit(benchmark::kMillisecond);

void BM_Icp(benchmark::State& state) {
  Rng rng(3);
  std::vector<Point3> pts;
  for (int i = 0; i < state.range(0); ++i) {
    const double x = rng.uniform(-20, 20), y = rng.uniform(-20, 20);
    pts.emplace_back(x, y, 0.5 * std::sin(0.3 * x) + 0.2 * std::cos(0.7 * y));
  }
  const PointCloud src(pts);
  const RigidMotion t(rot_z(2.0), Vector3(0.2, -0.1, 0.05));
  const PointCloud dst = transform(t, src);
  const SpatialIndex index(dst);
  for (auto _ : state) benchmark::DoNotOptimize(icp_refine(src, index, RigidMotion::identity()));
}
BENCHMARK(BM_Icp)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
