#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttm/common/tensor.hpp"
#include "ttm/motion/motion_spec.hpp"

namespace ttm::toy {

inline constexpr int kGeneratorVersion = 1;

enum class SpriteShape { Disk, Square, Triangle };

std::string_view to_string(SpriteShape shape);
SpriteShape parse_sprite_shape(std::string_view name);

struct Sprite {
    SpriteShape shape = SpriteShape::Disk;
    std::array<float, 3> color{1, 0, 0};
    int radius = 4;
    std::array<int, 2> start{0, 0};     // center (x, y) at frame 0
    std::array<int, 2> velocity{0, 0};  // pixels per frame

    std::array<int, 2> center(int frame) const {
        return {start[0] + velocity[0] * frame, start[1] + velocity[1] * frame};
    }
    /// Footprint test relative to the center.
    bool covers(int dx, int dy) const;
};

/// Horizontal band whose periodic texture slides by `velocity` pixels per frame.
struct WaterBand {
    int top = 0;
    int height = 0;  // 0 disables the band
    int velocity = 0;
    std::array<float, 3> base{0.25f, 0.35f, 0.5f};
    std::array<float, 2> amplitude{0.0f, 0.0f};  // of harmonics 3 and 5
    std::array<float, 2> phase{0.0f, 0.0f};
};

/// Low-frequency static texture: base color plus a sum of plane waves.
struct BackgroundTexture {
    std::array<float, 3> base{0.45f, 0.45f, 0.45f};
    std::array<std::array<float, 4>, 3> waves{};  // (kx, ky, phase, amplitude)
};

struct SceneParams {
    int height = 64;
    int width = 64;
    int frames = 16;
    int min_sprites = 1;
    int max_sprites = 1;
    int min_radius = 2;
    int max_radius = 3;
    int max_speed = 2;
    bool water_band = true;

    friend bool operator==(const SceneParams&, const SceneParams&) = default;
};

struct SpriteScene {
    int height = 64, width = 64, frames = 16;
    std::uint64_t seed = 0;
    BackgroundTexture background;
    WaterBand band;
    std::vector<Sprite> sprites;  // drawn in order, never overlapping
};

struct RenderedScene {
    Video video;                   // (F, 3, H, W), values on the 8-bit grid in [0, 1]
    std::vector<MaskVideo> masks;  // one (F, H, W) mask per sprite
    FloatTensor flow;              // (F-1, 2, H, W) forward flow (dx, dy) from frame f to f+1
};

/// Deterministic in (seed, params). Sprite centers stay at least `radius`
/// pixels inside the canvas on every frame.
SpriteScene sample_scene(std::uint64_t seed, const SceneParams& params = {});
RenderedScene render_scene(const SpriteScene& scene);

/// Sprite footprint at frame f as an (H, W) mask.
Mask sprite_mask(const SpriteScene& scene, std::size_t sprite, int frame);

/// Per-frame centers of one sprite as (x, y) pairs.
std::vector<std::array<double, 2>> sprite_trajectory(const SpriteScene& scene, std::size_t sprite);

/// Cut-and-drag spec that moves every sprite along its trajectory.
motion::MotionSpec scene_motion_spec(const SpriteScene& scene);

nlohmann::json to_json(const SpriteScene& scene);
SpriteScene sprite_scene_from_json(const nlohmann::json& doc);

/// Affine map between pixel values in [0, 1] and the toy model's space [-1, 1].
/// Works on images and videos alike; to_pixel_space clamps to [0, 1].
FloatTensor to_model_space(const FloatTensor& pixels);
FloatTensor to_pixel_space(const FloatTensor& model);

}  // namespace ttm::toy
