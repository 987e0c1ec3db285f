#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "ttm/app/pipeline.hpp"
#include "ttm/common/hash.hpp"
#include "ttm/common/tensor_file.hpp"
#include "ttm/diffusion/toy_denoiser.hpp"
#include "ttm/motion/warp.hpp"
#include "ttm/sampler/manifest.hpp"
#include "ttm/sampler/runner.hpp"
#include "ttm/toy/sprite_world.hpp"

using namespace ttm;
using ttm::testing::TempDir;

namespace {

motion::WarpedReference small_reference() {
    const auto scene = toy::sample_scene(4);
    const auto r = toy::render_scene(scene);
    return motion::build_warped_reference(video_frame(r.video, 0), toy::scene_motion_spec(scene));
}

sampler::SamplerConfig dual_config(std::uint64_t seed) {
    sampler::SamplerConfig c;
    c.seed = seed;
    return c;
}

std::string toy_checkpoint(const std::filesystem::path& dir) {
    Rng rng(8);
    const auto s = diffusion::make_schedule();
    diffusion::ToyCheckpoint ckpt{s, diffusion::SpaceTimeConvNet<float>({4, 2, 6.0f}, s.steps(), rng), {}, {}};
    const auto path = dir / "toy.ckpt";
    ckpt.save(path);
    return path.string();
}

}  // namespace

TEST(RunManifest, JsonRoundTrip) {
    sampler::RunManifest m;
    m.config.t_weak = 40;
    m.config.t_strong = 10;
    m.config.seed = 123456789012345ull;
    m.config.text = "a red ball";
    m.config.reference_noise = sampler::ReferenceNoiseMode::SharedEpsilon;
    m.steps = 50;
    m.schedule_hash = "abc";
    m.reference = {"reference.ttmt", "h1"};
    m.mask = {"mask.ttmt", "h2"};
    m.condition = {"condition.ttmt", "h3"};
    m.denoiser = "analytic";
    m.denoiser_params = {{"mean", 0.1}, {"variance", 0.2}};
    m.result_hash = "r";
    EXPECT_EQ(sampler::run_manifest_from_json(sampler::to_json(m)), m);
    auto doc = sampler::to_json(m);
    doc["version"] = 99;
    EXPECT_THROW(sampler::run_manifest_from_json(doc), ValidationError);
}

TEST(Runner, ReplayIsBitExactAndMatchesDirectSampling) {
    TempDir dir;
    const auto ref = small_reference();
    app::DenoiserChoice choice;
    choice.kind = "analytic";
    choice.mean = 0.0;
    choice.variance = 0.3;
    auto manifest = app::prepare_run(dir.path(), ref, std::nullopt, dual_config(5), choice);
    const auto first = app::run_and_store(manifest, dir.path());
    ASSERT_TRUE(manifest.result_hash.has_value());
    EXPECT_EQ(*manifest.result_hash, first.result_hash);
    EXPECT_EQ(first.stats.denoiser_calls, 36);

    const auto stored = sampler::read_run_manifest(dir / "manifest.json");
    const auto replay = sampler::execute_manifest(stored, dir.path());
    EXPECT_EQ(replay.result_hash, first.result_hash);
    EXPECT_EQ(replay.video, first.video);
    EXPECT_EQ(content_hash(read_float_tensor(dir / "result.ttmt")), first.result_hash);

    // Same inputs through the sampler directly.
    const auto loaded = app::load_denoiser(choice);
    const auto model_ref = toy::to_model_space(ref.frames);
    const auto direct = sampler::sample(*loaded.denoiser, loaded.schedule, model_ref, sampler::GuidanceMask{ref.mask},
                                        dual_config(5), video_frame(model_ref, 0));
    EXPECT_EQ(direct.video, first.video);
}

TEST(Runner, ToyCheckpointRunReplays) {
    TempDir dir;
    app::DenoiserChoice choice;
    choice.kind = "toy";
    choice.checkpoint = toy_checkpoint(dir.path());
    auto manifest = app::prepare_run(dir / "run", small_reference(), std::nullopt, dual_config(3), choice);
    const auto out = app::run_and_store(manifest, dir / "run");
    const auto replay = sampler::execute_manifest(sampler::read_run_manifest(dir / "run" / "manifest.json"),
                                                  dir / "run");
    EXPECT_EQ(replay.result_hash, out.result_hash);
}

TEST(Runner, TamperedInputIsRejected) {
    TempDir dir;
    app::DenoiserChoice choice;
    choice.kind = "analytic";
    auto manifest = app::prepare_run(dir.path(), small_reference(), std::nullopt, dual_config(1), choice);
    auto mask = read_mask_tensor(dir / manifest.mask.path);
    mask[0] = mask[0] ? 0 : 1;
    write_tensor(dir / manifest.mask.path, mask);
    EXPECT_THROW(sampler::execute_manifest(manifest, dir.path()), ValidationError);

    auto bad_schedule = manifest;
    bad_schedule.schedule_hash = "0000";
    EXPECT_THROW(sampler::resolve_manifest(bad_schedule, dir.path()), ValidationError);
}

TEST(Runner, MissingCheckpointIsAnError) {
    TempDir dir;
    app::DenoiserChoice choice;
    choice.kind = "toy";
    choice.checkpoint = (dir / "absent.ckpt").string();
    EXPECT_ANY_THROW(app::load_denoiser(choice));
}

TEST(WarpArtifact, RoundTripPreservesTensorsAndWarnings) {
    TempDir dir;
    auto ref = small_reference();
    ref.warnings.push_back("probe warning");
    app::write_warp_artifact(dir.path(), ref);
    const auto back = app::read_warp_artifact(dir.path());
    EXPECT_EQ(back.frames, ref.frames);
    EXPECT_EQ(back.mask, ref.mask);
    EXPECT_EQ(back.warnings, ref.warnings);
    EXPECT_TRUE(std::filesystem::exists(dir / "frame_0000.png"));
    EXPECT_TRUE(std::filesystem::exists(dir / "mask_0000.png"));
}

TEST(WarpArtifact, HashMismatchIsRejected) {
    TempDir dir;
    auto ref = small_reference();
    app::write_warp_artifact(dir.path(), ref);
    ref.mask[0] = ref.mask[0] ? 0 : 1;
    write_tensor(dir / "mask.ttmt", ref.mask);
    EXPECT_THROW(app::read_warp_artifact(dir.path()), ValidationError);
}
