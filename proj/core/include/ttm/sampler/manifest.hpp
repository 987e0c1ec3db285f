#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ttm/diffusion/schedule.hpp"
#include "ttm/sampler/config.hpp"

namespace ttm::sampler {

inline constexpr int kRunManifestVersion = 1;

/// Where a tensor input lives and what it must hash to.
struct InputRef {
    std::string path;
    std::string hash;

    friend bool operator==(const InputRef&, const InputRef&) = default;
};

/// Everything needed to replay one sample() call bit-for-bit.
struct RunManifest {
    SamplerConfig config;
    diffusion::ScheduleKind schedule_kind = diffusion::ScheduleKind::Cosine;
    int steps = 50;
    std::string schedule_hash;
    InputRef reference;   // (F, 3, H, W) tensor file
    InputRef mask;        // (F, H, W) tensor file
    InputRef condition;   // (3, H, W) tensor file
    std::string denoiser; // "toy" or "analytic"
    InputRef checkpoint;  // toy checkpoint; empty path for the analytic denoiser
    nlohmann::json denoiser_params = nlohmann::json::object();
    std::optional<std::string> result_hash;

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

nlohmann::json to_json(const RunManifest& manifest);
RunManifest run_manifest_from_json(const nlohmann::json& doc);

RunManifest read_run_manifest(const std::filesystem::path& path);
void write_run_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace ttm::sampler
