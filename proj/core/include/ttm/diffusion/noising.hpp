#pragma once

#include "ttm/common/random.hpp"
#include "ttm/common/tensor.hpp"
#include "ttm/diffusion/schedule.hpp"

namespace ttm::diffusion {

/// Noisy sample x_t: one clock for the whole tensor.
struct VideoState {
    Video values;
    int t = 0;
};

/// sqrt(alpha_bar[t]) * x0 + sqrt(1 - alpha_bar[t]) * eps with eps drawn from rng.
/// t == 0 returns x0 bit-for-bit and draws nothing.
VideoState forward_noise(const Video& x0, int t, const NoiseSchedule& schedule, Rng& rng);

/// Same as forward_noise with caller-supplied eps.
VideoState forward_noise_with(const Video& x0, int t, const NoiseSchedule& schedule, const Video& eps);

/// Ancestral DDPM step from an eps prediction:
///   mean = (x_t - beta_t / sqrt(1 - alpha_bar_t) * eps) / sqrt(alpha_t)
///   x_{t-1} = mean + sqrt(beta_tilde_t) * z,  no noise when t == 1.
VideoState ddpm_step(const VideoState& state, const Video& noise_pred, const NoiseSchedule& schedule,
                     Rng& rng);

/// x0 estimate implied by an eps prediction.
Video predict_x0(const VideoState& state, const Video& noise_pred, const NoiseSchedule& schedule);

}  // namespace ttm::diffusion
