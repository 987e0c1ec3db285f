#include <benchmark/benchmark.h>

#include "ttm/eval/flow.hpp"
#include "ttm/eval/tracker.hpp"
#include "ttm/toy/study.hpp"

using namespace ttm;

namespace {

const toy::SceneCase& scene() {
    static const toy::SceneCase c = toy::make_scene_case(toy::sample_scene(11));
    return c;
}

}  // namespace

void BM_BlockMatchingFlow(benchmark::State& state) {
    const eval::BlockMatchingFlow flow;
    for (auto _ : state) benchmark::DoNotOptimize(flow.flow(scene().rendered.video));
}
BENCHMARK(BM_BlockMatchingFlow)->Unit(benchmark::kMillisecond);

void BM_CentroidTracker(benchmark::State& state) {
    const auto& c = scene();
    for (auto _ : state) benchmark::DoNotOptimize(eval::centroid_tracker(c.rendered.video, c.objects[0].initial_mask));
}
BENCHMARK(BM_CentroidTracker)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
    const auto& v = scene().rendered.video;
    for (auto _ : state) benchmark::DoNotOptimize(eval::ssim(v, scene().warped.frames));
}
BENCHMARK(BM_Ssim)->Unit(benchmark::kMillisecond);
