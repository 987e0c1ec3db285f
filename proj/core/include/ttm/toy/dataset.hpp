#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttm/toy/sprite_world.hpp"

namespace ttm::toy {

inline constexpr int kDatasetFormatVersion = 1;

/// Seed of scene `index` in a dataset generated from `base_seed`.
std::uint64_t scene_seed(std::uint64_t base_seed, std::size_t index);

struct DatasetManifest {
    int generator_version = kGeneratorVersion;
    std::uint64_t base_seed = 0;
    SceneParams params;
    std::vector<std::uint64_t> seeds;
};

nlohmann::json to_json(const SceneParams& params);
SceneParams scene_params_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DatasetManifest& manifest);
DatasetManifest dataset_manifest_from_json(const nlohmann::json& doc);

/// Writes `count` scenes as dir/scene_NNNNN/{video,masks,flow}.ttmt plus
/// scene.json, and dir/manifest.json listing the seeds. Output does not
/// depend on `workers`.
DatasetManifest write_dataset(const std::filesystem::path& dir, std::size_t count, std::uint64_t base_seed,
                              const SceneParams& params = {}, std::size_t workers = 1);

DatasetManifest read_dataset_manifest(const std::filesystem::path& dir);

struct StoredScene {
    SpriteScene scene;
    RenderedScene rendered;
};

StoredScene read_scene(const std::filesystem::path& dir, std::size_t index);

}  // namespace ttm::toy
