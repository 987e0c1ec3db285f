#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttm/diffusion/toy_denoiser.hpp"
#include "ttm/toy/sprite_world.hpp"

namespace ttm::toy {

struct TrainConfig {
    int steps = 3000;
    int batch = 4;
    double learning_rate = 2e-3;
    int warmup = 100;
    double grad_clip = 1.0;
    int crop = 32;  // spatial crop side; all frames are kept
    std::uint64_t seed = 0;
    diffusion::ToyNetConfig net;
    diffusion::ScheduleKind schedule = diffusion::ScheduleKind::Cosine;
    int schedule_steps = 50;
    int log_every = 50;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& doc);

/// Training clips in model space, (F, 3, H, W). Index in [0, count).
struct SceneSource {
    std::size_t count = 0;
    std::function<Video(std::size_t)> clip;
};

struct LossPoint {
    int step = 0;
    double loss = 0.0;
};

struct TrainResult {
    diffusion::ToyCheckpoint checkpoint;
    std::vector<LossPoint> curve;
};

struct TrainHooks {
    /// Called after every optimizer step with the batch loss.
    std::function<void(int, double)> on_step;
    /// Called every `checkpoint_every` steps (0 disables) with the current state.
    std::function<void(const diffusion::ToyCheckpoint&)> on_checkpoint;
    int checkpoint_every = 0;
};

/// Adam on eps-MSE with uniform timesteps and random spatial crops. Each step
/// draws from Rng::derive(seed, step), so a run resumed from a checkpoint
/// continues exactly as an uninterrupted one. Throws RuntimeError on a
/// non-finite loss.
TrainResult train_toy(const TrainConfig& config, const SceneSource& data,
                      const std::optional<diffusion::ToyCheckpoint>& resume = std::nullopt,
                      const TrainHooks* hooks = nullptr);

/// Mean eps-MSE of a denoiser over clips, one draw of (t, eps) per clip and
/// draw; t is stratified over 1..T.
double heldout_eps_mse(const diffusion::DenoiserAdapter& denoiser, const diffusion::NoiseSchedule& schedule,
                       const SceneSource& data, std::uint64_t seed, int draws_per_clip = 4);

/// Source that regenerates sprite scenes from seeds in model space.
SceneSource sprite_source(std::uint64_t base_seed, std::size_t count, const SceneParams& params);

}  // namespace ttm::toy
