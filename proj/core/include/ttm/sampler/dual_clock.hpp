#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttm/common/tensor.hpp"
#include "ttm/diffusion/denoiser.hpp"
#include "ttm/diffusion/schedule.hpp"
#include "ttm/sampler/config.hpp"

namespace ttm::sampler {

/// Binary mask at the sampling-state resolution (F', H', W'), broadcast over channels.
struct GuidanceMask {
    MaskVideo mask;
};

/// Nearest-neighbor projection of a (F, H, W) mask to `target` = (F', H', W'):
/// source index = min(i * factor, size - 1) on each axis. Upsampling is rejected.
GuidanceMask project_mask(const MaskVideo& mask, const std::array<std::size_t, 3>& target,
                          int temporal_factor, int spatial_factor);

/// One reverse step t -> t-1 as seen by instrumentation. Pointers are valid
/// only during the callback.
struct StepRecord {
    int t = 0;
    bool override_active = false;
    const Video* state = nullptr;      // x_t
    const Video* denoised = nullptr;   // x_hat_{t-1}
    const Video* reference = nullptr;  // x^w_{t-1}, null outside the override window
    const Video* result = nullptr;     // x_{t-1}
    std::size_t override_writes = 0;   // elements taken from the reference
};

struct SamplerHooks {
    std::function<void(const StepRecord&)> on_step;
    /// Called after each step with (steps done, total steps).
    std::function<void(int, int)> on_progress;
};

struct SampleStats {
    int denoiser_calls = 0;
    std::vector<std::size_t> override_writes;  // indexed by t (the step t -> t-1)
};

struct SampleResult {
    Video video;
    SampleStats stats;
};

/// Region-dependent dual-clock sampling.
///   x_{t_weak} = noised V^w
///   for t = t_weak .. t_strong+1:  x_{t-1} = (1-M) * ddpm(x_t) + M * noised_{t-1}(V^w)
///   for t = t_strong .. 1:         x_{t-1} = ddpm(x_t)
/// The chain (initial noise, ancestral noise) draws from Rng(seed); reference
/// noising draws from a stream derived from (seed, 1), so the chain is the
/// same for every mask.
SampleResult sample(const diffusion::DenoiserAdapter& denoiser, const diffusion::NoiseSchedule& schedule,
                    const Video& reference, const GuidanceMask& mask, const SamplerConfig& config,
                    const Image& condition, const SamplerHooks* hooks = nullptr);

/// Single-clock SDEdit: noise V^w to t_star, then denoise freely. Identical to
/// sample() with an all-zero mask and t_weak = t_strong = t_star.
Video sdedit_baseline(const diffusion::DenoiserAdapter& denoiser, const diffusion::NoiseSchedule& schedule,
                      const Video& reference, int t_star, const Image& condition, std::uint64_t seed,
                      const std::optional<std::string>& text = std::nullopt);

}  // namespace ttm::sampler
