// Serial reference kernels vs the OpenMP kernels on a 320x240 synthetic pair.
// Thread count follows OMP_NUM_THREADS / GEOWARP_THREADS.

#include <benchmark/benchmark.h>

#include "geowarp/align.hpp"
#include "geowarp/parallel.hpp"
#include "geowarp/synth.hpp"
#include "geowarp/warp.hpp"

using namespace geowarp;

namespace {

const FramePair& bench_pair() {
  static const FramePair pair = [] {
    SceneOptions so;
    so.intrinsics = {160.0, 160.0, 159.5, 119.5, 320, 240};
    so.seed = 1;
    const Pose curr = pose_from_camera_center(Vec3(0.02, -0.01, 0.01), quat_exp(Vec3(0.002, -0.003, 0.001)));
    return make_pair(make_plane_scene(so), Pose::identity(), curr, {}, 3);
  }();
  return pair;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_Warp(benchmark::State& state) {
  const FramePair& pair = bench_pair();
  const RigidTransform rel = relative_transform(pose_to_transform(pair.gt_prev), pose_to_transform(pair.gt_curr));
  WarpOptions opt;
  opt.exec = exec_of(state);
  opt.keep_geometry = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(warp_image(pair.image_curr, pair.depth_prev, rel, pair.intrinsics, pair.mask, opt));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pair.mask.pixel_count()));
}

void BM_LossGradient(benchmark::State& state) {
  const FramePair& pair = bench_pair();
  const Pose pp = perturb_pose(pair.gt_prev, random_perturbation(1, 0.02, 0.01));
  const Pose pc = perturb_pose(pair.gt_curr, random_perturbation(2, 0.02, 0.01));
  const LossConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(total_loss_gradient(pair, pp, pc, cfg, WarpMode::SelfSupervised, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pair.mask.pixel_count()));
}

}  // namespace

BENCHMARK(BM_Warp)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossGradient)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  configure_threads();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::AddCustomContext("threads", std::to_string(max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
