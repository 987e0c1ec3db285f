#include "ttm/toy/sprite_world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ttm/common/error.hpp"
#include "ttm/common/random.hpp"

namespace ttm::toy {
namespace {

constexpr std::array<std::array<float, 3>, 6> kPalette{{
    {0.95f, 0.10f, 0.10f},
    {0.10f, 0.90f, 0.15f},
    {0.95f, 0.90f, 0.05f},
    {0.95f, 0.10f, 0.90f},
    {0.05f, 0.90f, 0.95f},
    {0.98f, 0.55f, 0.05f},
}};

float quantize(double v) { return static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0); }

bool sprites_overlap(const Sprite& a, const Sprite& b, int frames) {
    const int gap = a.radius + b.radius + 2;
    for (int f = 0; f < frames; ++f) {
        const auto ca = a.center(f), cb = b.center(f);
        if (std::abs(ca[0] - cb[0]) <= gap && std::abs(ca[1] - cb[1]) <= gap) return true;
    }
    return false;
}

std::array<float, 3> background_color(const SpriteScene& s, int x, int y, int f) {
    const auto& band = s.band;
    if (band.height > 0 && y >= band.top && y < band.top + band.height) {
        const int shifted = ((x - band.velocity * f) % s.width + s.width) % s.width;
        const double u = 2.0 * std::numbers::pi * shifted / s.width;
        const double v = std::numbers::pi * (y - band.top + 0.5) / band.height;
        const double pattern = band.amplitude[0] * std::sin(3.0 * u + band.phase[0]) +
                               band.amplitude[1] * std::sin(5.0 * u + band.phase[1]) * (0.6 + 0.4 * std::sin(v));
        return {band.base[0] + static_cast<float>(0.5 * pattern), band.base[1] + static_cast<float>(0.8 * pattern),
                band.base[2] + static_cast<float>(pattern)};
    }
    std::array<float, 3> c = s.background.base;
    for (int ch = 0; ch < 3; ++ch) {
        const auto& w = s.background.waves[static_cast<std::size_t>(ch)];
        c[static_cast<std::size_t>(ch)] += static_cast<float>(
            w[3] * std::sin(2.0 * std::numbers::pi * (w[0] * x / s.width + w[1] * y / s.height) + w[2]));
    }
    return c;
}

}  // namespace

std::string_view to_string(SpriteShape shape) {
    switch (shape) {
        case SpriteShape::Disk: return "disk";
        case SpriteShape::Square: return "square";
        case SpriteShape::Triangle: return "triangle";
    }
    return "disk";
}

SpriteShape parse_sprite_shape(std::string_view name) {
    if (name == "disk") return SpriteShape::Disk;
    if (name == "square") return SpriteShape::Square;
    if (name == "triangle") return SpriteShape::Triangle;
    throw ValidationError("SpriteScene.shape", "unknown sprite shape '" + std::string(name) + "'");
}

bool Sprite::covers(int dx, int dy) const {
    switch (shape) {
        case SpriteShape::Disk: return dx * dx + dy * dy <= radius * radius + radius / 2;
        case SpriteShape::Square: return std::abs(dx) < radius && std::abs(dy) < radius;
        case SpriteShape::Triangle:
            // Apex up, base on row +radius-1.
            return dy > -radius && dy < radius && 2 * std::abs(dx) <= dy + radius;
    }
    return false;
}

SpriteScene sample_scene(std::uint64_t seed, const SceneParams& p) {
    if (p.frames < 2 || p.height < 16 || p.width < 16 || p.min_sprites < 1 || p.max_sprites < p.min_sprites ||
        p.min_radius < 2 || p.max_radius < p.min_radius || p.max_speed < 1) {
        throw ValidationError("SceneParams.range", "scene parameters out of range");
    }
    Rng rng(seed);
    SpriteScene s;
    s.height = p.height;
    s.width = p.width;
    s.frames = p.frames;
    s.seed = seed;

    const float gray = static_cast<float>(rng.uniform(0.35, 0.6));
    for (int c = 0; c < 3; ++c) {
        s.background.base[static_cast<std::size_t>(c)] = gray + static_cast<float>(rng.uniform(-0.05, 0.05));
        s.background.waves[static_cast<std::size_t>(c)] = {
            static_cast<float>(rng.uniform_int(0, 2)), static_cast<float>(rng.uniform_int(0, 2)),
            static_cast<float>(rng.uniform(0.0, 2.0 * std::numbers::pi)), static_cast<float>(rng.uniform(0.03, 0.08))};
    }

    if (p.water_band) {
        s.band.height = rng.uniform_int(12, 20);
        s.band.top = rng.uniform_int(2, p.height - 2 - s.band.height);
        s.band.velocity = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform_int(1, 2);
        s.band.base = {static_cast<float>(rng.uniform(0.15, 0.3)), static_cast<float>(rng.uniform(0.3, 0.4)),
                       static_cast<float>(rng.uniform(0.45, 0.6))};
        s.band.amplitude = {static_cast<float>(rng.uniform(0.12, 0.2)), static_cast<float>(rng.uniform(0.08, 0.14))};
        s.band.phase = {static_cast<float>(rng.uniform(0.0, 2.0 * std::numbers::pi)),
                        static_cast<float>(rng.uniform(0.0, 2.0 * std::numbers::pi))};
    }

    const int count = rng.uniform_int(p.min_sprites, p.max_sprites);
    std::vector<std::size_t> colors{0, 1, 2, 3, 4, 5};
    std::shuffle(colors.begin(), colors.end(), rng.engine());
    for (int attempt = 0; static_cast<int>(s.sprites.size()) < count && attempt < 200; ++attempt) {
        Sprite sp;
        sp.shape = static_cast<SpriteShape>(rng.uniform_int(0, 2));
        sp.radius = rng.uniform_int(p.min_radius, p.max_radius);
        sp.color = kPalette[colors[s.sprites.size() % colors.size()]];
        do {
            sp.velocity = {rng.uniform_int(-p.max_speed, p.max_speed), rng.uniform_int(-p.max_speed, p.max_speed)};
        } while (sp.velocity[0] == 0 && sp.velocity[1] == 0);
        // Keep every center within [r, size-1-r] over all frames.
        const int travel_x = sp.velocity[0] * (p.frames - 1), travel_y = sp.velocity[1] * (p.frames - 1);
        const int lo_x = sp.radius - std::min(0, travel_x), hi_x = p.width - 1 - sp.radius - std::max(0, travel_x);
        const int lo_y = sp.radius - std::min(0, travel_y), hi_y = p.height - 1 - sp.radius - std::max(0, travel_y);
        if (lo_x > hi_x || lo_y > hi_y) continue;
        sp.start = {rng.uniform_int(lo_x, hi_x), rng.uniform_int(lo_y, hi_y)};
        const bool clash = std::any_of(s.sprites.begin(), s.sprites.end(),
                                       [&](const Sprite& o) { return sprites_overlap(o, sp, p.frames); });
        if (!clash) s.sprites.push_back(sp);
    }
    if (s.sprites.empty()) throw RuntimeError("could not place a sprite; canvas too small for the motion range");
    return s;
}

Mask sprite_mask(const SpriteScene& s, std::size_t index, int frame) {
    const Sprite& sp = s.sprites.at(index);
    Mask m = make_mask(static_cast<std::size_t>(s.height), static_cast<std::size_t>(s.width));
    const auto c = sp.center(frame);
    for (int dy = -sp.radius; dy <= sp.radius; ++dy)
        for (int dx = -sp.radius; dx <= sp.radius; ++dx) {
            const int x = c[0] + dx, y = c[1] + dy;
            if (x < 0 || y < 0 || x >= s.width || y >= s.height || !sp.covers(dx, dy)) continue;
            m.at({static_cast<std::size_t>(y), static_cast<std::size_t>(x)}) = 1;
        }
    return m;
}

RenderedScene render_scene(const SpriteScene& s) {
    const auto F = static_cast<std::size_t>(s.frames), H = static_cast<std::size_t>(s.height),
               W = static_cast<std::size_t>(s.width);
    RenderedScene out;
    out.video = Video({F, 3, H, W});
    out.flow = FloatTensor({F > 0 ? F - 1 : 0, 2, H, W});
    out.masks.assign(s.sprites.size(), MaskVideo({F, H, W}));
    const bool band = s.band.height > 0;

    for (std::size_t f = 0; f < F; ++f) {
        const int fi = static_cast<int>(f);
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x) {
                const auto c = background_color(s, static_cast<int>(x), static_cast<int>(y), fi);
                for (std::size_t ch = 0; ch < 3; ++ch) out.video.at({f, ch, y, x}) = quantize(c[ch]);
                if (f + 1 < F && band && static_cast<int>(y) >= s.band.top &&
                    static_cast<int>(y) < s.band.top + s.band.height) {
                    out.flow.at({f, 0, y, x}) = static_cast<float>(s.band.velocity);
                }
            }
        for (std::size_t i = 0; i < s.sprites.size(); ++i) {
            const Sprite& sp = s.sprites[i];
            const Mask m = sprite_mask(s, i, fi);
            set_mask_frame(out.masks[i], f, m);
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t x = 0; x < W; ++x) {
                    if (!m.at({y, x})) continue;
                    for (std::size_t ch = 0; ch < 3; ++ch) out.video.at({f, ch, y, x}) = quantize(sp.color[ch]);
                    if (f + 1 < F) {
                        out.flow.at({f, 0, y, x}) = static_cast<float>(sp.velocity[0]);
                        out.flow.at({f, 1, y, x}) = static_cast<float>(sp.velocity[1]);
                    }
                }
        }
    }
    return out;
}

std::vector<std::array<double, 2>> sprite_trajectory(const SpriteScene& s, std::size_t index) {
    const Sprite& sp = s.sprites.at(index);
    std::vector<std::array<double, 2>> out;
    for (int f = 0; f < s.frames; ++f) {
        const auto c = sp.center(f);
        out.push_back({static_cast<double>(c[0]), static_cast<double>(c[1])});
    }
    return out;
}

motion::MotionSpec scene_motion_spec(const SpriteScene& s) {
    motion::MotionSpec spec;
    spec.frame_count = s.frames;
    for (std::size_t i = 0; i < s.sprites.size(); ++i) {
        const Sprite& sp = s.sprites[i];
        motion::MotionRegion region;
        region.mask = sprite_mask(s, i, 0);
        region.keyframes.push_back({0, {}, std::nullopt});
        if (s.frames > 1) {
            motion::Keyframe last;
            last.frame = s.frames - 1;
            last.transform.dx = sp.velocity[0] * (s.frames - 1);
            last.transform.dy = sp.velocity[1] * (s.frames - 1);
            region.keyframes.push_back(last);
        }
        spec.regions.push_back(std::move(region));
    }
    return spec;
}

nlohmann::json to_json(const SpriteScene& s) {
    nlohmann::json sprites = nlohmann::json::array();
    for (const auto& sp : s.sprites) {
        sprites.push_back({{"shape", to_string(sp.shape)},
                           {"color", sp.color},
                           {"radius", sp.radius},
                           {"start", sp.start},
                           {"velocity", sp.velocity}});
    }
    return {{"generator_version", kGeneratorVersion},
            {"seed", s.seed},
            {"height", s.height},
            {"width", s.width},
            {"frames", s.frames},
            {"background", {{"base", s.background.base}, {"waves", s.background.waves}}},
            {"band",
             {{"top", s.band.top},
              {"height", s.band.height},
              {"velocity", s.band.velocity},
              {"base", s.band.base},
              {"amplitude", s.band.amplitude},
              {"phase", s.band.phase}}},
            {"sprites", sprites}};
}

SpriteScene sprite_scene_from_json(const nlohmann::json& j) {
    try {
        SpriteScene s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.height = j.at("height").get<int>();
        s.width = j.at("width").get<int>();
        s.frames = j.at("frames").get<int>();
        s.background.base = j.at("background").at("base").get<std::array<float, 3>>();
        s.background.waves = j.at("background").at("waves").get<std::array<std::array<float, 4>, 3>>();
        const auto& b = j.at("band");
        s.band.top = b.at("top").get<int>();
        s.band.height = b.at("height").get<int>();
        s.band.velocity = b.at("velocity").get<int>();
        s.band.base = b.at("base").get<std::array<float, 3>>();
        s.band.amplitude = b.at("amplitude").get<std::array<float, 2>>();
        s.band.phase = b.at("phase").get<std::array<float, 2>>();
        for (const auto& e : j.at("sprites")) {
            Sprite sp;
            sp.shape = parse_sprite_shape(e.at("shape").get<std::string>());
            sp.color = e.at("color").get<std::array<float, 3>>();
            sp.radius = e.at("radius").get<int>();
            sp.start = e.at("start").get<std::array<int, 2>>();
            sp.velocity = e.at("velocity").get<std::array<int, 2>>();
            s.sprites.push_back(sp);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("SpriteScene.schema", e.what());
    }
}

FloatTensor to_model_space(const FloatTensor& pixels) {
    FloatTensor out(pixels.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0f * pixels[i] - 1.0f;
    return out;
}

FloatTensor to_pixel_space(const FloatTensor& model) {
    FloatTensor out(model.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(0.5f * (model[i] + 1.0f), 0.0f, 1.0f);
    return out;
}

}  // namespace ttm::toy
