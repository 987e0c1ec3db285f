#include "ttm/toy/dataset.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "ttm/common/error.hpp"
#include "ttm/common/random.hpp"
#include "ttm/common/tensor_file.hpp"

namespace ttm::toy {
namespace {

std::filesystem::path scene_dir(const std::filesystem::path& dir, std::size_t index) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%05zu", index);
    return dir / name;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("Dataset.schema", path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

MaskTensor quantize_video(const Video& v) {
    MaskTensor out(v.shape());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<std::uint8_t>(std::lround(v[i] * 255.0f));
    return out;
}

Video dequantize_video(const MaskTensor& q) {
    Video out(q.shape());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = static_cast<float>(q[i] / 255.0);
    return out;
}

}  // namespace

std::uint64_t scene_seed(std::uint64_t base_seed, std::size_t index) {
    return Rng::derive(base_seed, 1000 + index).next();
}

nlohmann::json to_json(const SceneParams& p) {
    return {{"height", p.height},         {"width", p.width},         {"frames", p.frames},
            {"min_sprites", p.min_sprites}, {"max_sprites", p.max_sprites}, {"min_radius", p.min_radius},
            {"max_radius", p.max_radius}, {"max_speed", p.max_speed}, {"water_band", p.water_band}};
}

SceneParams scene_params_from_json(const nlohmann::json& j) {
    try {
        SceneParams p;
        p.height = j.value("height", p.height);
        p.width = j.value("width", p.width);
        p.frames = j.value("frames", p.frames);
        p.min_sprites = j.value("min_sprites", p.min_sprites);
        p.max_sprites = j.value("max_sprites", p.max_sprites);
        p.min_radius = j.value("min_radius", p.min_radius);
        p.max_radius = j.value("max_radius", p.max_radius);
        p.max_speed = j.value("max_speed", p.max_speed);
        p.water_band = j.value("water_band", p.water_band);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("SceneParams.schema", e.what());
    }
}

nlohmann::json to_json(const DatasetManifest& m) {
    return {{"version", kDatasetFormatVersion},
            {"generator_version", m.generator_version},
            {"base_seed", m.base_seed},
            {"params", to_json(m.params)},
            {"seeds", m.seeds}};
}

DatasetManifest dataset_manifest_from_json(const nlohmann::json& j) {
    try {
        if (j.at("version").get<int>() != kDatasetFormatVersion) {
            throw ValidationError("Dataset.version", "unsupported dataset format version");
        }
        DatasetManifest m;
        m.generator_version = j.at("generator_version").get<int>();
        m.base_seed = j.at("base_seed").get<std::uint64_t>();
        m.params = scene_params_from_json(j.at("params"));
        m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (m.seeds.empty()) throw ValidationError("Dataset.nonempty", "dataset lists no scenes");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("Dataset.schema", e.what());
    }
}

DatasetManifest write_dataset(const std::filesystem::path& dir, std::size_t count, std::uint64_t base_seed,
                              const SceneParams& params, std::size_t workers) {
    if (count == 0) throw ValidationError("Dataset.nonempty", "n_scenes must be >= 1");
    if (workers == 0) throw ValidationError("Dataset.workers", "workers must be >= 1");
    std::filesystem::create_directories(dir);
    DatasetManifest m;
    m.base_seed = base_seed;
    m.params = params;
    for (std::size_t i = 0; i < count; ++i) m.seeds.push_back(scene_seed(base_seed, i));

    // Scenes depend only on their own seed, so workers can take indices in any order.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                const SpriteScene scene = sample_scene(m.seeds[i], params);
                const RenderedScene r = render_scene(scene);
                const auto sd = scene_dir(dir, i);
                std::filesystem::create_directories(sd);
                write_tensor(sd / "video.ttmt", quantize_video(r.video));
                MaskTensor masks({r.masks.size(), r.video.dim(0), r.video.dim(2), r.video.dim(3)});
                const std::size_t per = r.video.dim(0) * r.video.dim(2) * r.video.dim(3);
                for (std::size_t s = 0; s < r.masks.size(); ++s) {
                    std::copy(r.masks[s].values().begin(), r.masks[s].values().end(), masks.data() + s * per);
                }
                write_tensor(sd / "masks.ttmt", masks);
                write_tensor(sd / "flow.ttmt", r.flow);
                write_json(sd / "scene.json", to_json(scene));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(workers, count); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    write_json(dir / "manifest.json", to_json(m));
    return m;
}

DatasetManifest read_dataset_manifest(const std::filesystem::path& dir) {
    return dataset_manifest_from_json(read_json(dir / "manifest.json"));
}

StoredScene read_scene(const std::filesystem::path& dir, std::size_t index) {
    const auto sd = scene_dir(dir, index);
    StoredScene out;
    out.scene = sprite_scene_from_json(read_json(sd / "scene.json"));
    out.rendered.video = dequantize_video(read_mask_tensor(sd / "video.ttmt"));
    const MaskTensor masks = read_mask_tensor(sd / "masks.ttmt");
    if (masks.rank() != 4) throw ValidationError("Dataset.masks_shape", "masks must be (S, F, H, W)");
    const std::size_t per = masks.dim(1) * masks.dim(2) * masks.dim(3);
    for (std::size_t s = 0; s < masks.dim(0); ++s) {
        MaskVideo m({masks.dim(1), masks.dim(2), masks.dim(3)});
        std::copy(masks.data() + s * per, masks.data() + (s + 1) * per, m.data());
        out.rendered.masks.push_back(std::move(m));
    }
    out.rendered.flow = read_float_tensor(sd / "flow.ttmt");
    return out;
}

}  // namespace ttm::toy
