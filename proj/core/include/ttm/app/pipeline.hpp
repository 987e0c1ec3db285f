#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ttm/motion/warp.hpp"
#include "ttm/sampler/runner.hpp"

namespace ttm::app {

/// On-disk WarpedReference: reference.ttmt (F, 3, H, W), mask.ttmt (F, H, W),
/// frame_NNNN.png / mask_NNNN.png previews and reference.json with hashes and
/// warnings. `extra` fields (e.g. the invoking seed) are merged into the summary.
void write_warp_artifact(const std::filesystem::path& dir, const motion::WarpedReference& ref,
                         const nlohmann::json& extra = nlohmann::json::object());
motion::WarpedReference read_warp_artifact(const std::filesystem::path& dir);
nlohmann::json warp_artifact_summary(const motion::WarpedReference& ref,
                                     const nlohmann::json& extra = nlohmann::json::object());

/// Which denoiser a run uses. Toy runs need a checkpoint path; analytic runs
/// use a Gaussian prior N(mean, variance) in model space.
struct DenoiserChoice {
    std::string kind = "toy";
    std::string checkpoint;
    double mean = 0.0;
    double variance = 1.0;
    diffusion::ScheduleKind schedule = diffusion::ScheduleKind::Cosine;
    int steps = 50;
};

struct LoadedDenoiser {
    std::unique_ptr<diffusion::DenoiserAdapter> denoiser;
    diffusion::NoiseSchedule schedule;
};
LoadedDenoiser load_denoiser(const DenoiserChoice& choice);

/// Writes model-space inputs (reference, mask, condition) into `run_dir` and
/// returns a manifest naming them by relative path, hashes stamped.
/// `condition` defaults to frame 0 of the reference.
sampler::RunManifest prepare_run(const std::filesystem::path& run_dir, const motion::WarpedReference& ref,
                                 const std::optional<Image>& condition, const sampler::SamplerConfig& config,
                                 const DenoiserChoice& denoiser);

/// Executes the manifest in `run_dir`, writes result.ttmt (model space),
/// result_NNNN.png frames and manifest.json with the result hash.
sampler::RunOutput run_and_store(sampler::RunManifest& manifest, const std::filesystem::path& run_dir,
                                 const sampler::SamplerHooks* hooks = nullptr);

}  // namespace ttm::app
