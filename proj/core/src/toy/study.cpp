#include "ttm/toy/study.hpp"

#include "ttm/common/random.hpp"

namespace ttm::toy {

SceneCase make_scene_case(const SpriteScene& scene) {
    SceneCase c;
    c.scene = scene;
    c.rendered = render_scene(scene);
    c.warped = motion::build_warped_reference(video_frame(c.rendered.video, 0), scene_motion_spec(scene));
    for (std::size_t i = 0; i < scene.sprites.size(); ++i) {
        eval::ObjectTarget o;
        o.initial_mask = mask_frame(c.rendered.masks[i], 0);
        const auto origin = motion::mask_centroid(o.initial_mask);
        const auto& v = scene.sprites[i].velocity;
        for (int f = 0; f < scene.frames; ++f) o.target.push_back({origin[0] + v[0] * f, origin[1] + v[1] * f});
        c.objects.push_back(std::move(o));
    }
    return c;
}

eval::EvalReport run_toy_study(const diffusion::DenoiserAdapter& denoiser, const diffusion::NoiseSchedule& schedule,
                               const std::vector<SceneCase>& scenes, const StudyConfig& config,
                               const eval::FlowProvider& flow,
                               const std::function<void(std::size_t, std::size_t)>& progress) {
    std::vector<eval::RowAccumulator> acc(config.settings.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const SceneCase& sc = scenes[i];
        const Video reference = to_model_space(sc.warped.frames);
        const Image condition = to_model_space(video_frame(sc.rendered.video, 0));
        sampler::SamplerConfig base;
        base.seed = Rng::derive(config.seed, i).next();
        base.reference_noise = config.reference_noise;
        const auto outputs = sampler::run_ablation_grid(denoiser, schedule, reference,
                                                        sampler::GuidanceMask{sc.warped.mask}, config.settings,
                                                        condition, base);
        for (std::size_t s = 0; s < outputs.size(); ++s) {
            acc[s].add(eval::evaluate_clip(to_pixel_space(outputs[s].video), sc.objects, flow, config.tracker));
        }
        if (progress) progress(i + 1, scenes.size());
    }
    eval::EvalReport report;
    for (std::size_t s = 0; s < config.settings.size(); ++s) {
        report.rows.push_back(acc[s].finish(config.settings[s].label()));
    }
    report.meta = {{"scenes", scenes.size()}, {"seed", config.seed},
                   {"reference_noise_mode", sampler::to_string(config.reference_noise)}};
    return report;
}

}  // namespace ttm::toy
