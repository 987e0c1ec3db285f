#include "ttm/sampler/ablation.hpp"

namespace ttm::sampler {

std::string AblationSetting::label() const {
    return std::string(to_string(regime)) + "(" + std::to_string(t1) + "," + std::to_string(t2) + ")";
}

std::vector<AblationSetting> standard_ablation_settings(int steps, int t_weak, int t_strong) {
    return {
        {t_weak, t_weak, Regime::SingleClock},
        {t_strong, t_strong, Regime::SingleClock},
        {steps, 0, Regime::RepaintStyle},
        {t_weak, 0, Regime::RepaintStyle},
        {t_strong, 0, Regime::RepaintStyle},
        {steps, t_weak, Regime::UnconstrainedBackground},
        {steps, t_strong, Regime::UnconstrainedBackground},
        {t_weak, t_strong, Regime::DualClock},
    };
}

std::vector<AblationOutput> run_ablation_grid(const diffusion::DenoiserAdapter& denoiser,
                                              const diffusion::NoiseSchedule& schedule, const Video& reference,
                                              const GuidanceMask& mask,
                                              const std::vector<AblationSetting>& settings,
                                              const Image& condition, const SamplerConfig& base) {
    std::vector<SamplerConfig> configs;
    for (const auto& s : settings) {
        SamplerConfig c = base;
        c.t_weak = s.t1;
        c.t_strong = s.t2;
        c.regime = s.regime;
        validate(c, schedule.steps());
        configs.push_back(c);
    }
    std::vector<AblationOutput> out;
    for (std::size_t i = 0; i < settings.size(); ++i) {
        auto r = sample(denoiser, schedule, reference, mask, configs[i], condition);
        out.push_back({settings[i], std::move(r.video), std::move(r.stats)});
    }
    return out;
}

}  // namespace ttm::sampler
