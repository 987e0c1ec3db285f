#include "ttm/sampler/runner.hpp"

#include "ttm/common/error.hpp"
#include "ttm/common/hash.hpp"
#include "ttm/common/tensor_file.hpp"
#include "ttm/diffusion/toy_denoiser.hpp"

#include <fstream>
#include <sstream>

namespace ttm::sampler {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

void check_hash(const std::string& expected, const std::string& actual, const std::string& what) {
    if (!expected.empty() && expected != actual) {
        throw ValidationError("RunManifest.hash_mismatch", what + " hash " + actual + " != recorded " + expected);
    }
}

}  // namespace

ResolvedRun resolve_manifest(const RunManifest& m, const std::filesystem::path& base_dir) {
    Video reference = read_float_tensor(resolve(base_dir, m.reference.path));
    MaskVideo mask = read_mask_tensor(resolve(base_dir, m.mask.path));
    Image condition = read_float_tensor(resolve(base_dir, m.condition.path));
    check_hash(m.reference.hash, content_hash(reference), "reference");
    check_hash(m.mask.hash, content_hash(mask), "mask");
    check_hash(m.condition.hash, content_hash(condition), "condition");
    for (auto v : mask.values()) {
        if (v > 1) throw ValidationError("GuidanceMask.binary", "mask values must be 0 or 1");
    }
    if (condition.rank() != 3) throw ValidationError("SourceImage.shape", "condition must be (3, H, W)");

    std::unique_ptr<diffusion::DenoiserAdapter> denoiser;
    std::optional<diffusion::NoiseSchedule> schedule;
    if (m.denoiser == "toy") {
        const auto path = resolve(base_dir, m.checkpoint.path);
        check_hash(m.checkpoint.hash, file_hash(path), "checkpoint");
        auto ckpt = diffusion::ToyCheckpoint::load(path);
        schedule = ckpt.schedule;
        denoiser = std::make_unique<diffusion::ToyDenoiser>(ckpt);
    } else {
        schedule = diffusion::make_schedule(m.schedule_kind, m.steps);
        denoiser = std::make_unique<diffusion::AnalyticGaussianDenoiser>(
            *schedule, m.denoiser_params.value("mean", 0.0), m.denoiser_params.value("variance", 1.0));
    }
    if (schedule->kind() != m.schedule_kind || schedule->steps() != m.steps) {
        throw ValidationError("RunManifest.schedule", "manifest schedule differs from the denoiser's");
    }
    check_hash(m.schedule_hash, schedule->hash(), "schedule");
    return {std::move(denoiser), std::move(*schedule), std::move(reference), GuidanceMask{std::move(mask)},
            std::move(condition)};
}

RunOutput execute_manifest(const RunManifest& m, const std::filesystem::path& base_dir, const SamplerHooks* hooks) {
    auto run = resolve_manifest(m, base_dir);
    auto r = sample(*run.denoiser, run.schedule, run.reference, run.mask, m.config, run.condition, hooks);
    RunOutput out{std::move(r.video), std::move(r.stats), {}};
    out.result_hash = content_hash(out.video);
    return out;
}

void stamp_manifest_hashes(RunManifest& m, const std::filesystem::path& base_dir) {
    m.reference.hash = content_hash(read_float_tensor(resolve(base_dir, m.reference.path)));
    m.mask.hash = content_hash(read_mask_tensor(resolve(base_dir, m.mask.path)));
    m.condition.hash = content_hash(read_float_tensor(resolve(base_dir, m.condition.path)));
    if (m.denoiser == "toy") {
        const auto path = resolve(base_dir, m.checkpoint.path);
        m.checkpoint.hash = file_hash(path);
        m.schedule_hash = diffusion::ToyCheckpoint::load(path).schedule.hash();
    } else {
        m.schedule_hash = diffusion::make_schedule(m.schedule_kind, m.steps).hash();
    }
}

}  // namespace ttm::sampler
