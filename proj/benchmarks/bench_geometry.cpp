#include <benchmark/benchmark.h>

#include "ttm/common/random.hpp"
#include "ttm/depth/reproject.hpp"
#include "ttm/motion/warp.hpp"

using namespace ttm;

namespace {

Image random_image(std::size_t side, Rng& rng) {
    Image img = make_image(side, side);
    for (auto& v : img.values()) v = static_cast<float>(rng.uniform());
    return img;
}

Mask square(std::size_t side, std::size_t size) {
    Mask m = make_mask(side, side);
    const std::size_t o = (side - size) / 2;
    for (std::size_t y = o; y < o + size; ++y)
        for (std::size_t x = o; x < o + size; ++x) m.at({y, x}) = 1;
    return m;
}

}  // namespace

// Warped reference for a rotating, scaling drag over 16 frames.
void BM_BuildWarpedReference(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const Image img = random_image(side, rng);
    motion::MotionSpec spec;
    spec.frame_count = 16;
    motion::Keyframe k0, k1;
    k1.frame = 15;
    k1.transform = {double(side) / 8, -double(side) / 16, 0.6, 0.2};
    spec.regions.push_back({square(side, side / 4), {k0, k1}});
    for (auto _ : state) benchmark::DoNotOptimize(motion::build_warped_reference(img, spec));
}
BENCHMARK(BM_BuildWarpedReference)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_NnInpaint(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    const Image img = random_image(side, rng);
    const Mask holes = square(side, side / 3);
    for (auto _ : state) benchmark::DoNotOptimize(motion::nn_inpaint(img, holes));
}
BENCHMARK(BM_NnInpaint)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SplatView(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    const Image img = random_image(side, rng);
    FloatTensor d({side, side});
    for (auto& v : d.values()) v = static_cast<float>(rng.uniform(2.0, 6.0));
    const double c = (double(side) - 1) / 2;
    const depth::DepthMap dm{d, {double(side), double(side), c, c}, {}};
    const auto cloud = depth::backproject(img, dm);
    depth::CameraPose pose;
    pose.translation = {0.1, 0.0, 0.2};
    for (auto _ : state) benchmark::DoNotOptimize(depth::splat_view(cloud, pose, dm.intrinsics));
}
BENCHMARK(BM_SplatView)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
