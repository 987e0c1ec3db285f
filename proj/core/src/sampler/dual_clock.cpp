#include "ttm/sampler/dual_clock.hpp"

#include <algorithm>

#include "ttm/common/random.hpp"
#include "ttm/diffusion/noising.hpp"

namespace ttm::sampler {

using diffusion::VideoState;

GuidanceMask project_mask(const MaskVideo& mask, const std::array<std::size_t, 3>& target,
                          int temporal_factor, int spatial_factor) {
    if (mask.rank() != 3) throw ValidationError("GuidanceMask.shape", "mask must be (F, H, W)");
    if (temporal_factor < 1 || spatial_factor < 1) {
        throw ValidationError("project_mask.factors", "factors must be >= 1");
    }
    const auto [tf, th, tw] = target;
    if (tf > mask.dim(0) || th > mask.dim(1) || tw > mask.dim(2)) {
        throw ValidationError("project_mask.no_upsampling", "target larger than source mask");
    }
    const auto pick = [](std::size_t i, int factor, std::size_t size) {
        return std::min(i * static_cast<std::size_t>(factor), size - 1);
    };
    GuidanceMask out{MaskVideo({tf, th, tw})};
    for (std::size_t f = 0; f < tf; ++f) {
        const std::size_t sf = pick(f, temporal_factor, mask.dim(0));
        for (std::size_t y = 0; y < th; ++y) {
            const std::size_t sy = pick(y, spatial_factor, mask.dim(1));
            for (std::size_t x = 0; x < tw; ++x) {
                const std::size_t sx = pick(x, spatial_factor, mask.dim(2));
                out.mask.at({f, y, x}) = mask.at({sf, sy, sx}) ? 1 : 0;
            }
        }
    }
    return out;
}

SampleResult sample(const diffusion::DenoiserAdapter& denoiser, const diffusion::NoiseSchedule& schedule,
                    const Video& reference, const GuidanceMask& mask, const SamplerConfig& config,
                    const Image& condition, const SamplerHooks* hooks) {
    validate(config, schedule.steps());
    if (reference.rank() != 4) throw ValidationError("sample.reference_shape", "reference must be (F, C, H, W)");
    const std::size_t frames = reference.dim(0), channels = reference.dim(1);
    const std::size_t plane = reference.dim(2) * reference.dim(3);
    if (mask.mask.rank() != 3 || mask.mask.dim(0) != frames || mask.mask.dim(1) != reference.dim(2) ||
        mask.mask.dim(2) != reference.dim(3)) {
        throw ValidationError("sample.mask_shape", "guidance mask " + shape_string(mask.mask.shape()) +
                                                       " does not match state " + shape_string(reference.shape()));
    }

    Rng chain(config.seed);
    Rng reference_rng = Rng::derive(config.seed, 1);

    SampleResult result;
    result.stats.override_writes.assign(static_cast<std::size_t>(schedule.steps()) + 1, 0);

    Video init_eps;
    VideoState x{reference, 0};
    if (config.t_weak > 0) {
        init_eps = Video(reference.shape());
        chain.fill_normal(init_eps.values());
        x = diffusion::forward_noise_with(reference, config.t_weak, schedule, init_eps);
    }

    const int total = config.t_weak;
    for (int t = config.t_weak; t >= 1; --t) {
        const Video eps = denoiser.predict_noise(x, condition, config.text);
        ++result.stats.denoiser_calls;
        VideoState denoised = diffusion::ddpm_step(x, eps, schedule, chain);

        const bool override_active = t > config.t_strong;
        std::optional<Video> noised_reference;
        std::size_t writes = 0;
        Video next;
        if (override_active) {
            noised_reference = config.reference_noise == ReferenceNoiseMode::SharedEpsilon
                                   ? diffusion::forward_noise_with(reference, t - 1, schedule, init_eps).values
                                   : diffusion::forward_noise(reference, t - 1, schedule, reference_rng).values;
            // M is binary, so the convex blend reduces to per-element selection.
            next = denoised.values;
            for (std::size_t f = 0; f < frames; ++f)
                for (std::size_t i = 0; i < plane; ++i) {
                    if (!mask.mask[f * plane + i]) continue;
                    for (std::size_t c = 0; c < channels; ++c) {
                        const std::size_t e = (f * channels + c) * plane + i;
                        next[e] = (*noised_reference)[e];
                    }
                    writes += channels;
                }
        } else {
            next = std::move(denoised.values);
        }
        result.stats.override_writes[static_cast<std::size_t>(t)] = writes;

        if (hooks && hooks->on_step) {
            StepRecord rec;
            rec.t = t;
            rec.override_active = override_active;
            rec.state = &x.values;
            rec.denoised = override_active ? &denoised.values : &next;
            rec.reference = noised_reference ? &*noised_reference : nullptr;
            rec.result = &next;
            rec.override_writes = writes;
            hooks->on_step(rec);
        }
        x = VideoState{std::move(next), t - 1};
        if (hooks && hooks->on_progress) hooks->on_progress(total - t + 1, total);
    }
    result.video = std::move(x.values);
    return result;
}

Video sdedit_baseline(const diffusion::DenoiserAdapter& denoiser, const diffusion::NoiseSchedule& schedule,
                      const Video& reference, int t_star, const Image& condition, std::uint64_t seed,
                      const std::optional<std::string>& text) {
    if (reference.rank() != 4) throw ValidationError("sample.reference_shape", "reference must be (F, C, H, W)");
    SamplerConfig config;
    config.t_weak = t_star;
    config.t_strong = t_star;
    config.regime = Regime::SingleClock;
    config.seed = seed;
    config.text = text;
    const GuidanceMask none{MaskVideo({reference.dim(0), reference.dim(2), reference.dim(3)})};
    return sample(denoiser, schedule, reference, none, config, condition).video;
}

}  // namespace ttm::sampler
