#pragma once

#include <string>
#include <vector>

#include "ttm/sampler/dual_clock.hpp"

namespace ttm::sampler {

struct AblationSetting {
    int t1 = 0;  // t_weak
    int t2 = 0;  // t_strong
    Regime regime = Regime::DualClock;

    std::string label() const;
    friend bool operator==(const AblationSetting&, const AblationSetting&) = default;
};

/// The eight rows of the clock ablation, in table order:
/// (tw,tw) (ts,ts) (T,0) (tw,0) (ts,0) (T,tw) (T,ts) (tw,ts).
std::vector<AblationSetting> standard_ablation_settings(int steps, int t_weak = kDefaultTWeak,
                                                        int t_strong = kDefaultTStrong);

struct AblationOutput {
    AblationSetting setting;
    Video video;
    SampleStats stats;
};

/// Runs every setting with the same seed and reference noise mode taken from `base`.
std::vector<AblationOutput> run_ablation_grid(const diffusion::DenoiserAdapter& denoiser,
                                              const diffusion::NoiseSchedule& schedule, const Video& reference,
                                              const GuidanceMask& mask,
                                              const std::vector<AblationSetting>& settings,
                                              const Image& condition, const SamplerConfig& base = {});

}  // namespace ttm::sampler
