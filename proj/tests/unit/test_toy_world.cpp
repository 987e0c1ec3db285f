#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "ttm/motion/warp.hpp"
#include "ttm/toy/dataset.hpp"
#include "ttm/toy/sprite_world.hpp"

using namespace ttm;
using namespace ttm::toy;

namespace {

SpriteScene manual_scene(std::array<int, 2> velocity, int band_velocity = 0) {
    SpriteScene s;
    s.height = 24;
    s.width = 32;
    s.frames = 5;
    s.band = {16, 6, band_velocity, {0.2f, 0.3f, 0.6f}, {0.1f, 0.05f}, {0.3f, 1.1f}};
    Sprite sp;
    sp.shape = SpriteShape::Square;
    sp.color = {0.9f, 0.1f, 0.2f};
    sp.radius = 2;
    sp.start = {6, 6};
    sp.velocity = velocity;
    s.sprites.push_back(sp);
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(SpriteWorld, SamplingIsDeterministicAndSeedSensitive) {
    EXPECT_EQ(to_json(sample_scene(5)), to_json(sample_scene(5)));
    EXPECT_NE(to_json(sample_scene(5)), to_json(sample_scene(6)));
    const auto a = render_scene(sample_scene(5));
    const auto b = render_scene(sample_scene(5));
    EXPECT_EQ(a.video, b.video);
    EXPECT_EQ(a.flow, b.flow);
}

TEST(SpriteWorld, SampledScenesRespectParameters) {
    const SceneParams p;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto s = sample_scene(seed, p);
        EXPECT_EQ(s.height, p.height);
        EXPECT_EQ(s.frames, p.frames);
        ASSERT_GE(int(s.sprites.size()), p.min_sprites);
        ASSERT_LE(int(s.sprites.size()), p.max_sprites);
        for (const auto& sp : s.sprites) {
            EXPECT_GE(sp.radius, p.min_radius);
            EXPECT_LE(sp.radius, p.max_radius);
            EXPECT_LE(std::max(std::abs(sp.velocity[0]), std::abs(sp.velocity[1])), p.max_speed);
            for (int f = 0; f < s.frames; ++f) {
                const auto c = sp.center(f);
                EXPECT_GE(c[0], sp.radius);
                EXPECT_GE(c[1], sp.radius);
                EXPECT_LT(c[0], s.width - sp.radius);
                EXPECT_LT(c[1], s.height - sp.radius);
            }
        }
    }
}

TEST(SpriteWorld, PixelsLieOnTheEightBitGrid) {
    const auto r = render_scene(sample_scene(3));
    for (float v : r.video.values()) {
        ASSERT_GE(v, 0.0f);
        ASSERT_LE(v, 1.0f);
        ASSERT_EQ(v, std::round(v * 255.0f) / 255.0f);
    }
}

TEST(SpriteWorld, StaticSceneHasZeroFlowAndConstantFrames) {
    const auto s = manual_scene({0, 0}, 0);
    const auto r = render_scene(s);
    for (float v : r.flow.values()) EXPECT_EQ(v, 0.0f);
    for (std::size_t f = 1; f < 5; ++f) EXPECT_EQ(video_frame(r.video, f), video_frame(r.video, 0));
}

TEST(SpriteWorld, FlowIsExactInsideSpriteAndBand) {
    const auto s = manual_scene({2, 1}, 3);
    const auto r = render_scene(s);
    for (std::size_t f = 0; f + 1 < 5; ++f)
        for (std::size_t y = 0; y < 24; ++y)
            for (std::size_t x = 0; x < 32; ++x) {
                const float fx = r.flow.at({f, 0, y, x}), fy = r.flow.at({f, 1, y, x});
                if (r.masks[0].at({f, y, x})) {
                    EXPECT_EQ(fx, 2.0f);
                    EXPECT_EQ(fy, 1.0f);
                    // The sprite pixel lands inside the next frame's footprint with the same color.
                    ASSERT_EQ(r.masks[0].at({f + 1, y + 1, x + 2}), 1);
                    for (std::size_t c = 0; c < 3; ++c)
                        EXPECT_EQ(r.video.at({f + 1, c, y + 1, x + 2}), r.video.at({f, c, y, x}));
                } else if (y >= 16 && y < 22) {
                    EXPECT_EQ(fx, 3.0f);
                    EXPECT_EQ(fy, 0.0f);
                    if (x + 3 < 32 && !r.masks[0].at({f + 1, y, x + 3})) {
                        for (std::size_t c = 0; c < 3; ++c)
                            EXPECT_EQ(r.video.at({f + 1, c, y, x + 3}), r.video.at({f, c, y, x})) << f << y << x;
                    }
                } else {
                    EXPECT_EQ(fx, 0.0f);
                    EXPECT_EQ(fy, 0.0f);
                }
            }
}

TEST(SpriteWorld, MasksAndTrajectoriesAgree) {
    const auto s = sample_scene(21);
    const auto r = render_scene(s);
    for (std::size_t i = 0; i < s.sprites.size(); ++i) {
        const auto traj = sprite_trajectory(s, i);
        ASSERT_EQ(traj.size(), std::size_t(s.frames));
        for (int f = 0; f < s.frames; ++f) {
            const Mask m = sprite_mask(s, i, f);
            for (std::size_t k = 0; k < m.size(); ++k) ASSERT_EQ(r.masks[i][std::size_t(f) * m.size() + k], m[k]);
            const auto c = motion::mask_centroid(m);
            // Shapes are symmetric about the center except the triangle.
            if (s.sprites[i].shape != SpriteShape::Triangle) {
                EXPECT_DOUBLE_EQ(c[0], traj[std::size_t(f)][0]);
                EXPECT_DOUBLE_EQ(c[1], traj[std::size_t(f)][1]);
            }
        }
    }
}

TEST(SpriteWorld, CutAndDragOfFirstFrameReproducesSprite) {
    const auto s = manual_scene({2, -1});
    const auto r = render_scene(s);
    const auto ref = motion::build_warped_reference(video_frame(r.video, 0), scene_motion_spec(s));
    ASSERT_EQ(ref.frame_count(), 5u);
    for (std::size_t f = 0; f < 5; ++f)
        for (std::size_t y = 0; y < 24; ++y)
            for (std::size_t x = 0; x < 32; ++x) {
                ASSERT_EQ(ref.mask.at({f, y, x}), r.masks[0].at({f, y, x})) << f << " " << y << " " << x;
                if (!ref.mask.at({f, y, x})) continue;
                for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(ref.frames.at({f, c, y, x}), r.video.at({f, c, y, x}));
            }
}

TEST(SpriteWorld, SceneJsonRoundTrip) {
    const auto s = sample_scene(77);
    const auto back = sprite_scene_from_json(to_json(s));
    EXPECT_EQ(to_json(back), to_json(s));
    EXPECT_EQ(render_scene(back).video, render_scene(s).video);
    EXPECT_THROW(parse_sprite_shape("hexagon"), ValidationError);
}

TEST(SpriteWorld, ModelSpaceMapping) {
    FloatTensor px({4});
    px[0] = 0.0f;
    px[1] = 0.5f;
    px[2] = 1.0f;
    px[3] = 0.25f;
    const auto m = to_model_space(px);
    EXPECT_EQ(m[0], -1.0f);
    EXPECT_EQ(m[1], 0.0f);
    EXPECT_EQ(m[2], 1.0f);
    EXPECT_EQ(to_pixel_space(m), px);
    FloatTensor wild({2});
    wild[0] = -3.0f;
    wild[1] = 2.0f;
    const auto c = to_pixel_space(wild);
    EXPECT_EQ(c[0], 0.0f);
    EXPECT_EQ(c[1], 1.0f);
}

TEST(Dataset, OutputIsIndependentOfWorkerCount) {
    ttm::testing::TempDir a, b;
    SceneParams p;
    p.height = p.width = 20;
    p.frames = 3;
    const auto ma = write_dataset(a.path(), 6, 314, p, 1);
    const auto mb = write_dataset(b.path(), 6, 314, p, 3);
    EXPECT_EQ(ma.seeds, mb.seeds);
    for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), a.path());
        EXPECT_EQ(slurp(entry.path()), slurp(b.path() / rel)) << rel;
    }
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(ma.seeds[i], scene_seed(314, i));
}

TEST(Dataset, StoredScenesMatchRegeneration) {
    ttm::testing::TempDir d;
    SceneParams p;
    p.height = p.width = 20;
    p.frames = 3;
    write_dataset(d.path(), 3, 9, p);
    const auto manifest = read_dataset_manifest(d.path());
    EXPECT_EQ(manifest.params, p);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto stored = read_scene(d.path(), i);
        const auto fresh = render_scene(sample_scene(scene_seed(9, i), p));
        EXPECT_EQ(stored.rendered.video, fresh.video);
        EXPECT_EQ(stored.rendered.flow, fresh.flow);
        ASSERT_EQ(stored.rendered.masks.size(), fresh.masks.size());
        for (std::size_t k = 0; k < fresh.masks.size(); ++k) EXPECT_EQ(stored.rendered.masks[k], fresh.masks[k]);
    }
}
