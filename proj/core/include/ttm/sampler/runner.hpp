#pragma once

#include <filesystem>
#include <memory>

#include "ttm/diffusion/denoiser.hpp"
#include "ttm/sampler/dual_clock.hpp"
#include "ttm/sampler/manifest.hpp"

namespace ttm::sampler {

struct ResolvedRun {
    std::unique_ptr<diffusion::DenoiserAdapter> denoiser;
    diffusion::NoiseSchedule schedule;
    Video reference;
    GuidanceMask mask;
    Image condition;
};

/// Loads every input named by the manifest (relative paths resolve against
/// `base_dir`) and checks the recorded hashes. A mismatch is a ValidationError.
ResolvedRun resolve_manifest(const RunManifest& manifest, const std::filesystem::path& base_dir);

struct RunOutput {
    Video video;
    SampleStats stats;
    std::string result_hash;
};

RunOutput execute_manifest(const RunManifest& manifest, const std::filesystem::path& base_dir,
                           const SamplerHooks* hooks = nullptr);

/// Fills the hash fields of `manifest` from the files it names.
void stamp_manifest_hashes(RunManifest& manifest, const std::filesystem::path& base_dir);

}  // namespace ttm::sampler
