#include "ttm/app/pipeline.hpp"

#include <fstream>

#include "ttm/common/error.hpp"
#include "ttm/common/hash.hpp"
#include "ttm/common/image_io.hpp"
#include "ttm/common/tensor_file.hpp"
#include "ttm/diffusion/toy_denoiser.hpp"
#include "ttm/toy/sprite_world.hpp"

namespace ttm::app {

nlohmann::json warp_artifact_summary(const motion::WarpedReference& ref, const nlohmann::json& extra) {
    nlohmann::json j = {{"frames", ref.frames.dim(0)},
                        {"height", ref.frames.dim(2)},
                        {"width", ref.frames.dim(3)},
                        {"reference_hash", content_hash(ref.frames)},
                        {"mask_hash", content_hash(ref.mask)},
                        {"warnings", ref.warnings}};
    j.update(extra);
    return j;
}

void write_warp_artifact(const std::filesystem::path& dir, const motion::WarpedReference& ref,
                         const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    write_tensor(dir / "reference.ttmt", ref.frames);
    write_tensor(dir / "mask.ttmt", ref.mask);
    write_frame_sequence(dir, ref.frames, &ref.mask);
    std::ofstream out(dir / "reference.json");
    if (!out) throw RuntimeError("cannot write " + (dir / "reference.json").string());
    out << warp_artifact_summary(ref, extra).dump(2) << '\n';
}

motion::WarpedReference read_warp_artifact(const std::filesystem::path& dir) {
    motion::WarpedReference ref;
    ref.frames = read_float_tensor(dir / "reference.ttmt");
    ref.mask = read_mask_tensor(dir / "mask.ttmt");
    if (ref.frames.rank() != 4 || ref.frames.dim(1) != 3 || ref.mask.rank() != 3 ||
        ref.mask.dim(0) != ref.frames.dim(0) || ref.mask.dim(1) != ref.frames.dim(2) ||
        ref.mask.dim(2) != ref.frames.dim(3)) {
        throw ValidationError("WarpedReference.shape", "reference/mask shapes are inconsistent");
    }
    const auto summary_path = dir / "reference.json";
    if (std::filesystem::exists(summary_path)) {
        std::ifstream in(summary_path);
        const auto summary = nlohmann::json::parse(in);
        if (summary.value("reference_hash", "") != content_hash(ref.frames) ||
            summary.value("mask_hash", "") != content_hash(ref.mask)) {
            throw ValidationError("WarpedReference.hash", "reference.json hashes do not match the tensors");
        }
        ref.warnings = summary.value("warnings", std::vector<std::string>{});
    }
    return ref;
}

LoadedDenoiser load_denoiser(const DenoiserChoice& choice) {
    if (choice.kind == "toy") {
        if (choice.checkpoint.empty()) throw ValidationError("RunManifest.checkpoint", "toy runs need a checkpoint");
        auto ckpt = diffusion::ToyCheckpoint::load(choice.checkpoint);
        auto schedule = ckpt.schedule;
        return {std::make_unique<diffusion::ToyDenoiser>(ckpt), std::move(schedule)};
    }
    if (choice.kind == "analytic") {
        auto schedule = diffusion::make_schedule(choice.schedule, choice.steps);
        return {std::make_unique<diffusion::AnalyticGaussianDenoiser>(schedule, choice.mean, choice.variance),
                std::move(schedule)};
    }
    throw ValidationError("RunManifest.denoiser", "unknown denoiser '" + choice.kind + "'");
}

sampler::RunManifest prepare_run(const std::filesystem::path& run_dir, const motion::WarpedReference& ref,
                                 const std::optional<Image>& condition, const sampler::SamplerConfig& config,
                                 const DenoiserChoice& denoiser) {
    std::filesystem::create_directories(run_dir);
    const Image cond = condition ? *condition : video_frame(ref.frames, 0);
    validate_source_image(cond);
    if (cond.dim(1) != ref.frames.dim(2) || cond.dim(2) != ref.frames.dim(3)) {
        throw ValidationError("SourceImage.shape", "condition image does not match the reference frames");
    }
    write_tensor(run_dir / "reference.ttmt", toy::to_model_space(ref.frames));
    write_tensor(run_dir / "mask.ttmt", ref.mask);
    write_tensor(run_dir / "condition.ttmt", toy::to_model_space(cond));

    sampler::RunManifest m;
    m.config = config;
    m.reference.path = "reference.ttmt";
    m.mask.path = "mask.ttmt";
    m.condition.path = "condition.ttmt";
    m.denoiser = denoiser.kind;
    if (denoiser.kind == "toy") {
        if (denoiser.checkpoint.empty()) throw ValidationError("RunManifest.checkpoint", "toy runs need a checkpoint");
        if (!std::filesystem::exists(denoiser.checkpoint)) {
            throw RuntimeError("checkpoint not found: " + denoiser.checkpoint);
        }
        m.checkpoint.path = std::filesystem::absolute(denoiser.checkpoint).string();
        const auto ckpt = diffusion::ToyCheckpoint::load(m.checkpoint.path);
        m.schedule_kind = ckpt.schedule.kind();
        m.steps = ckpt.schedule.steps();
    } else if (denoiser.kind == "analytic") {
        m.schedule_kind = denoiser.schedule;
        m.steps = denoiser.steps;
        m.denoiser_params = {{"mean", denoiser.mean}, {"variance", denoiser.variance}};
    } else {
        throw ValidationError("RunManifest.denoiser", "unknown denoiser '" + denoiser.kind + "'");
    }
    sampler::validate(config, m.steps);
    sampler::stamp_manifest_hashes(m, run_dir);
    return m;
}

sampler::RunOutput run_and_store(sampler::RunManifest& manifest, const std::filesystem::path& run_dir,
                                 const sampler::SamplerHooks* hooks) {
    auto out = sampler::execute_manifest(manifest, run_dir, hooks);
    write_tensor(run_dir / "result.ttmt", out.video);
    const Video pixels = toy::to_pixel_space(out.video);
    for (std::size_t f = 0; f < pixels.dim(0); ++f) {
        write_png(run_dir / frame_filename("result", f), video_frame(pixels, f));
    }
    manifest.result_hash = out.result_hash;
    sampler::write_run_manifest(run_dir / "manifest.json", manifest);
    return out;
}

}  // namespace ttm::app
