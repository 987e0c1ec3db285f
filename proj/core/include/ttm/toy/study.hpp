#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ttm/diffusion/denoiser.hpp"
#include "ttm/eval/report.hpp"
#include "ttm/motion/warp.hpp"
#include "ttm/sampler/ablation.hpp"
#include "ttm/toy/sprite_world.hpp"

namespace ttm::toy {

/// Everything the sampler and the metrics need for one held-out scene.
struct SceneCase {
    SpriteScene scene;
    RenderedScene rendered;
    motion::WarpedReference warped;  // cut-and-drag of frame 0 along the true trajectories
    std::vector<eval::ObjectTarget> objects;
};

SceneCase make_scene_case(const SpriteScene& scene);

struct StudyConfig {
    std::vector<sampler::AblationSetting> settings;
    std::uint64_t seed = 0;  // sampler seed for scene i is Rng::derive(seed, i)
    sampler::ReferenceNoiseMode reference_noise = sampler::ReferenceNoiseMode::FreshPerStep;
    eval::TrackerConfig tracker;
};

/// Runs every setting on every scene and aggregates one report row per
/// setting (labelled by AblationSetting::label). Flow comes from `flow`.
eval::EvalReport run_toy_study(const diffusion::DenoiserAdapter& denoiser, const diffusion::NoiseSchedule& schedule,
                               const std::vector<SceneCase>& scenes, const StudyConfig& config,
                               const eval::FlowProvider& flow,
                               const std::function<void(std::size_t, std::size_t)>& progress = {});

}  // namespace ttm::toy
