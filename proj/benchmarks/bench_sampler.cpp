#include <benchmark/benchmark.h>

#include "ttm/diffusion/denoiser.hpp"
#include "ttm/diffusion/toy_denoiser.hpp"
#include "ttm/sampler/dual_clock.hpp"
#include "ttm/toy/trainer.hpp"

using namespace ttm;

namespace {

Video random_video(std::size_t f, std::size_t side, Rng& rng) {
    Video v({f, 3, side, side});
    for (auto& x : v.values()) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return v;
}

sampler::GuidanceMask half_mask(std::size_t f, std::size_t side) {
    sampler::GuidanceMask m{MaskVideo({f, side, side})};
    for (std::size_t i = 0; i < m.mask.size(); ++i) m.mask[i] = (i % side) < side / 2;
    return m;
}

}  // namespace

// One toy-network eps prediction on a (16, 3, side, side) state.
void BM_ToyPredictNoise(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto s = diffusion::make_schedule();
    Rng rng(1);
    const diffusion::ToyDenoiser den(s, diffusion::SpaceTimeConvNet<float>({16, 3, 6.0f}, s.steps(), rng));
    const diffusion::VideoState x{random_video(16, side, rng), 30};
    const Image cond = video_frame(x.values, 0);
    for (auto _ : state) benchmark::DoNotOptimize(den.predict_noise(x, cond));
    state.SetItemsProcessed(state.iterations() * 16 * static_cast<long>(side * side));
}
BENCHMARK(BM_ToyPredictNoise)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// Full dual-clock sample with the analytic denoiser: isolates sampler overhead.
void BM_DualClockAnalytic(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto s = diffusion::make_schedule();
    const diffusion::AnalyticGaussianDenoiser den(s, 0.0, 0.25);
    Rng rng(2);
    const Video ref = random_video(16, side, rng);
    const auto mask = half_mask(16, side);
    sampler::SamplerConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(sampler::sample(den, s, ref, mask, c, video_frame(ref, 0)));
}
BENCHMARK(BM_DualClockAnalytic)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// Full dual-clock sample with the toy denoiser at the study resolution.
void BM_DualClockToy(benchmark::State& state) {
    const auto s = diffusion::make_schedule();
    Rng rng(3);
    const diffusion::ToyDenoiser den(s, diffusion::SpaceTimeConvNet<float>({16, 3, 6.0f}, s.steps(), rng));
    const Video ref = random_video(16, 64, rng);
    const auto mask = half_mask(16, 64);
    sampler::SamplerConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(sampler::sample(den, s, ref, mask, c, video_frame(ref, 0)));
}
BENCHMARK(BM_DualClockToy)->Unit(benchmark::kMillisecond)->Iterations(2);

// One optimizer step of toy training (batch 4, 32x32 crops of 16-frame clips).
void BM_TrainStep(benchmark::State& state) {
    toy::TrainConfig c;
    c.steps = 1;
    c.warmup = 1;
    const auto data = toy::sprite_source(7, 16, {});
    for (auto _ : state) benchmark::DoNotOptimize(toy::train_toy(c, data));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);
