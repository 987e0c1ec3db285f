#include "commands.hpp"

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

#include "service.hpp"
#include "ttm/app/pipeline.hpp"
#include "ttm/common/error.hpp"
#include "ttm/common/hash.hpp"
#include "ttm/common/image_io.hpp"
#include "ttm/common/tensor_file.hpp"
#include "ttm/depth/reproject.hpp"
#include "ttm/eval/flow.hpp"
#include "ttm/eval/report.hpp"
#include "ttm/motion/spec_json.hpp"
#include "ttm/sampler/ablation.hpp"
#include "ttm/toy/dataset.hpp"
#include "ttm/toy/study.hpp"
#include "ttm/toy/trainer.hpp"

namespace ttm::cli {
namespace {

namespace fs = std::filesystem;

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("json.parse", path.string() + ": " + e.what());
    }
}

struct SamplerFlags {
    int t_weak = sampler::kDefaultTWeak;
    int t_strong = sampler::kDefaultTStrong;
    std::string regime = "dual_clock";
    std::string reference_noise = "fresh_per_step";
    std::string text;

    void add(CLI::App* cmd) {
        cmd->add_option("--t-weak", t_weak, "Clock of the masked region")->capture_default_str();
        cmd->add_option("--t-strong", t_strong, "Clock of the unmasked region")->capture_default_str();
        cmd->add_option("--regime", regime, "dual_clock | single_clock | repaint_style | unconstrained_bg")
            ->capture_default_str();
        cmd->add_option("--reference-noise", reference_noise, "fresh_per_step | shared_epsilon")->capture_default_str();
        cmd->add_option("--text", text, "Text prompt (ignored by the toy denoisers)");
    }

    sampler::SamplerConfig config(std::uint64_t seed) const {
        sampler::SamplerConfig c;
        c.t_weak = t_weak;
        c.t_strong = t_strong;
        c.regime = sampler::parse_regime(regime);
        c.reference_noise = sampler::parse_reference_noise_mode(reference_noise);
        c.seed = seed;
        if (!text.empty()) c.text = text;
        return c;
    }
};

struct DenoiserFlags {
    std::string kind = "toy";
    std::string checkpoint;
    double mean = 0.0;
    double variance = 1.0;
    std::string schedule = "cosine";
    int steps = 50;

    void add(CLI::App* cmd) {
        cmd->add_option("--denoiser", kind, "toy | analytic")->capture_default_str();
        cmd->add_option("--checkpoint", checkpoint, "Toy denoiser checkpoint");
        cmd->add_option("--prior-mean", mean, "Analytic prior mean (model space)")->capture_default_str();
        cmd->add_option("--prior-variance", variance, "Analytic prior variance")->capture_default_str();
        cmd->add_option("--schedule", schedule, "Analytic schedule: cosine | linear")->capture_default_str();
        cmd->add_option("--steps", steps, "Analytic schedule length")->capture_default_str();
    }

    app::DenoiserChoice choice() const {
        app::DenoiserChoice c;
        c.kind = kind;
        c.checkpoint = checkpoint;
        c.mean = mean;
        c.variance = variance;
        c.schedule = diffusion::parse_schedule_kind(schedule);
        c.steps = steps;
        return c;
    }
};

void print_warnings(const motion::WarpedReference& ref) {
    for (const auto& w : ref.warnings) std::cerr << "warning: " << w << "\n";
}

// ---- warp / camera-warp -----------------------------------------------------

void add_warp(CLI::App& app) {
    struct Opts {
        std::string image, spec, out;
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("warp", "Build a warped reference and mask from an image and a motion spec");
    cmd->add_option("--image", o->image, "Source PNG")->required()->check(CLI::ExistingFile);
    cmd->add_option("--spec", o->spec, "MotionSpec JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o->out, "Output directory")->required();
    cmd->add_option("--seed", o->seed, "Recorded in reference.json; warping is deterministic");
    cmd->callback([o] {
        const Image image = read_png(o->image);
        validate_source_image(image);
        const auto spec = motion::read_motion_spec(o->spec);
        motion::validate(spec, image.dim(1), image.dim(2));
        const auto ref = motion::build_warped_reference(image, spec);
        const nlohmann::json extra = {{"seed", o->seed}};
        app::write_warp_artifact(o->out, ref, extra);
        print_warnings(ref);
        std::cout << app::warp_artifact_summary(ref, extra).dump(2) << "\n";
    });
}

void add_camera_warp(CLI::App& app) {
    struct Opts {
        std::string image, depth, path, out;
        double scale = 0.0;
        int open_kernel = 5;
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("camera-warp", "Build a warped reference by reprojecting a depth map along a camera path");
    cmd->add_option("--image", o->image, "Source PNG")->required()->check(CLI::ExistingFile);
    cmd->add_option("--depth", o->depth, "Depth map (PFM)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--path", o->path, "Camera path JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o->out, "Output directory")->required();
    cmd->add_option("--scale", o->scale, "Override the translation scale of the path");
    cmd->add_option("--open-kernel", o->open_kernel, "Mask opening kernel")->capture_default_str();
    cmd->add_option("--seed", o->seed, "Recorded in reference.json; reprojection is deterministic");
    cmd->callback([o] {
        const Image image = read_png(o->image);
        validate_source_image(image);
        auto doc = depth::read_camera_path(o->path);
        if (o->scale > 0.0) doc.path.scale = o->scale;
        const depth::DepthMap dm{read_pfm(o->depth), doc.intrinsics, doc.axes};
        depth::CameraReferenceOptions options;
        options.open_kernel = o->open_kernel;
        const auto ref = depth::build_camera_reference(image, dm, doc.path, options);
        const nlohmann::json extra = {{"seed", o->seed}};
        app::write_warp_artifact(o->out, ref, extra);
        print_warnings(ref);
        std::cout << app::warp_artifact_summary(ref, extra).dump(2) << "\n";
    });
}

// ---- generate -----------------------------------------------------------------

void add_generate(CLI::App& app) {
    struct Opts {
        std::string warp, manifest, out, condition;
        std::uint64_t seed = 0;
        SamplerFlags sampler;
        DenoiserFlags denoiser;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("generate", "Run dual-clock sampling on a warped reference, or replay a run manifest");
    auto* warp = cmd->add_option("--warp", o->warp, "Warp artifact directory (from warp / camera-warp)");
    auto* manifest = cmd->add_option("--manifest", o->manifest, "Replay this run manifest")->check(CLI::ExistingFile);
    warp->excludes(manifest);
    cmd->add_option("--out", o->out, "Run directory (defaults to the manifest's directory on replay)");
    cmd->add_option("--condition", o->condition, "Conditioning PNG (defaults to reference frame 0)");
    cmd->add_option("--seed", o->seed, "Sampler seed")->capture_default_str();
    o->sampler.add(cmd);
    o->denoiser.add(cmd);
    cmd->callback([o] {
        sampler::SamplerHooks hooks;
        hooks.on_progress = [](int done, int total) {
            if (done == total || done % 10 == 0) std::cerr << "step " << done << "/" << total << "\n";
        };
        sampler::RunManifest m;
        fs::path run_dir;
        if (!o->manifest.empty()) {
            m = sampler::read_run_manifest(o->manifest);
            const fs::path base = fs::path(o->manifest).parent_path();
            run_dir = o->out.empty() ? base : fs::path(o->out);
            if (run_dir != base) {
                // Replays into a fresh directory take their inputs from the manifest's directory.
                fs::create_directories(run_dir);
                for (auto* ref : {&m.reference, &m.mask, &m.condition}) {
                    if (fs::path(ref->path).is_relative()) {
                        fs::copy_file(base / ref->path, run_dir / ref->path, fs::copy_options::overwrite_existing);
                    }
                }
            }
        } else {
            if (o->warp.empty()) throw ValidationError("generate.input", "pass --warp or --manifest");
            if (o->out.empty()) throw ValidationError("generate.out", "--out is required with --warp");
            run_dir = o->out;
            const auto ref = app::read_warp_artifact(o->warp);
            std::optional<Image> condition;
            if (!o->condition.empty()) condition = read_png(o->condition);
            m = app::prepare_run(run_dir, ref, condition, o->sampler.config(o->seed), o->denoiser.choice());
        }
        const auto out = app::run_and_store(m, run_dir, &hooks);
        std::cout << nlohmann::json{{"run_dir", run_dir.string()},
                                    {"result_hash", out.result_hash},
                                    {"denoiser_calls", out.stats.denoiser_calls},
                                    {"seed", m.config.seed}}
                         .dump(2)
                  << "\n";
    });
}

// ---- ablate -------------------------------------------------------------------

void add_ablate(CLI::App& app) {
    struct Opts {
        std::string warp, out, flow = "block_matching";
        std::size_t scenes = 8;
        std::uint64_t scene_seed = 1u << 20;
        std::uint64_t seed = 0;
        int t_weak = sampler::kDefaultTWeak, t_strong = sampler::kDefaultTStrong;
        std::string reference_noise = "fresh_per_step";
        DenoiserFlags denoiser;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("ablate", "Run the eight-setting clock ablation on toy scenes or one warped reference");
    cmd->add_option("--warp", o->warp, "Warp artifact directory; without it, held-out toy scenes are used");
    cmd->add_option("--scenes", o->scenes, "Number of toy scenes")->capture_default_str();
    cmd->add_option("--scene-seed", o->scene_seed, "Base seed of the toy scenes")->capture_default_str();
    cmd->add_option("--t-weak", o->t_weak, "Weak clock")->capture_default_str();
    cmd->add_option("--t-strong", o->t_strong, "Strong clock")->capture_default_str();
    cmd->add_option("--reference-noise", o->reference_noise, "fresh_per_step | shared_epsilon")->capture_default_str();
    cmd->add_option("--flow", o->flow, "Flow provider for dynamic degree")->capture_default_str();
    cmd->add_option("--out", o->out, "Write the report JSON (and per-setting videos with --warp) here");
    cmd->add_option("--seed", o->seed, "Sampler seed")->capture_default_str();
    o->denoiser.add(cmd);
    cmd->callback([o] {
        const auto loaded = app::load_denoiser(o->denoiser.choice());
        const auto settings = sampler::standard_ablation_settings(loaded.schedule.steps(), o->t_weak, o->t_strong);
        const auto flow = eval::make_flow_provider(o->flow);
        const auto noise_mode = sampler::parse_reference_noise_mode(o->reference_noise);

        if (o->warp.empty()) {
            std::vector<toy::SceneCase> cases;
            for (std::size_t i = 0; i < o->scenes; ++i) {
                cases.push_back(toy::make_scene_case(toy::sample_scene(toy::scene_seed(o->scene_seed, i))));
            }
            toy::StudyConfig config;
            config.settings = settings;
            config.seed = o->seed;
            config.reference_noise = noise_mode;
            auto report = toy::run_toy_study(*loaded.denoiser, loaded.schedule, cases, config, *flow,
                                             [](std::size_t done, std::size_t total) {
                                                 std::cerr << "\rscene " << done << "/" << total << std::flush;
                                             });
            std::cerr << "\n";
            report.meta["scene_seed"] = o->scene_seed;
            std::cout << report.table();
            if (!o->out.empty()) write_json_file(fs::path(o->out) / "report.json", report.to_json());
            return;
        }

        const auto ref = app::read_warp_artifact(o->warp);
        const Video reference = toy::to_model_space(ref.frames);
        const Image condition = toy::to_model_space(video_frame(ref.frames, 0));
        sampler::SamplerConfig base;
        base.seed = o->seed;
        base.reference_noise = noise_mode;
        const auto outputs = sampler::run_ablation_grid(*loaded.denoiser, loaded.schedule, reference,
                                                        sampler::GuidanceMask{ref.mask}, settings, condition, base);
        nlohmann::json rows = nlohmann::json::array();
        std::cout << std::left << std::setw(26) << "setting" << std::setw(10) << "dynamic" << "score\n";
        for (const auto& r : outputs) {
            const Video pixels = toy::to_pixel_space(r.video);
            const auto dyn = eval::dynamic_degree(pixels, *flow);
            std::cout << std::setw(26) << r.setting.label() << std::setw(10) << (dyn.dynamic ? "yes" : "no")
                      << std::fixed << std::setprecision(3) << dyn.score << "\n";
            // Labels carry parentheses; keep directory names shell-friendly.
            const std::string dir_name = std::string(sampler::to_string(r.setting.regime)) + "_" +
                                         std::to_string(r.setting.t1) + "_" + std::to_string(r.setting.t2);
            rows.push_back({{"setting", r.setting.label()},
                            {"dir", dir_name},
                            {"t1", r.setting.t1},
                            {"t2", r.setting.t2},
                            {"result_hash", content_hash(r.video)},
                            {"dynamic", dyn.dynamic},
                            {"dynamic_score", dyn.score}});
            if (!o->out.empty()) {
                const fs::path dir = fs::path(o->out) / dir_name;
                fs::create_directories(dir);
                write_tensor(dir / "result.ttmt", r.video);
                write_frame_sequence(dir, pixels);
            }
        }
        if (!o->out.empty()) write_json_file(fs::path(o->out) / "report.json", {{"rows", rows}, {"seed", o->seed}});
    });
}

// ---- train-toy ----------------------------------------------------------------

toy::SceneSource dataset_source(const fs::path& dir) {
    const auto manifest = toy::read_dataset_manifest(dir);
    toy::SceneSource src;
    src.count = manifest.seeds.size();
    src.clip = [dir](std::size_t i) { return toy::to_model_space(toy::read_scene(dir, i).rendered.video); };
    return src;
}

void add_train(CLI::App& app) {
    struct Opts {
        std::string out, dataset, config, resume, curve;
        std::size_t scenes = 2000;
        std::uint64_t data_seed = 0;
        std::uint64_t seed = 0;
        int checkpoint_every = 0;
        toy::TrainConfig train;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("train-toy", "Train the toy image-conditioned video denoiser");
    cmd->add_option("--out", o->out, "Checkpoint path")->required();
    cmd->add_option("--dataset", o->dataset, "Dataset directory from gen-dataset; otherwise scenes are generated");
    cmd->add_option("--scenes", o->scenes, "Generated training scenes")->capture_default_str();
    cmd->add_option("--data-seed", o->data_seed, "Base seed of generated training scenes")->capture_default_str();
    cmd->add_option("--config", o->config, "TrainConfig JSON; flags below override it")->check(CLI::ExistingFile);
    cmd->add_option("--train-steps", o->train.steps, "Optimizer steps")->capture_default_str();
    cmd->add_option("--batch", o->train.batch, "Batch size")->capture_default_str();
    cmd->add_option("--lr", o->train.learning_rate, "Peak learning rate")->capture_default_str();
    cmd->add_option("--crop", o->train.crop, "Spatial crop")->capture_default_str();
    cmd->add_option("--hidden", o->train.net.hidden, "Hidden channels")->capture_default_str();
    cmd->add_option("--depth", o->train.net.depth, "Convolution count")->capture_default_str();
    cmd->add_option("--resume", o->resume, "Resume from this checkpoint")->check(CLI::ExistingFile);
    cmd->add_option("--checkpoint-every", o->checkpoint_every, "Save the checkpoint every N steps (0: only at the end)");
    cmd->add_option("--curve", o->curve, "Write the loss curve as CSV");
    cmd->add_option("--seed", o->seed, "Training seed")->capture_default_str();
    cmd->callback([o, cmd] {
        toy::TrainConfig config = o->train;
        if (!o->config.empty()) {
            config = toy::train_config_from_json(read_json_file(o->config));
            for (const auto* name : {"--train-steps", "--batch", "--lr", "--crop", "--hidden", "--depth"}) {
                if (cmd->count(name) == 0) continue;
                const std::string n = name;
                if (n == "--train-steps") config.steps = o->train.steps;
                if (n == "--batch") config.batch = o->train.batch;
                if (n == "--lr") config.learning_rate = o->train.learning_rate;
                if (n == "--crop") config.crop = o->train.crop;
                if (n == "--hidden") config.net.hidden = o->train.net.hidden;
                if (n == "--depth") config.net.depth = o->train.net.depth;
            }
        }
        if (cmd->count("--seed") || o->config.empty()) config.seed = o->seed;

        const auto data = o->dataset.empty() ? toy::sprite_source(o->data_seed, o->scenes, {}) : dataset_source(o->dataset);
        std::optional<diffusion::ToyCheckpoint> resume;
        if (!o->resume.empty()) resume = diffusion::ToyCheckpoint::load(o->resume);

        toy::TrainHooks hooks;
        hooks.checkpoint_every = o->checkpoint_every;
        hooks.on_checkpoint = [o](const diffusion::ToyCheckpoint& c) { c.save(o->out); };
        hooks.on_step = [&config](int step, double loss) {
            if (step % config.log_every == 0 || step == config.steps) {
                std::cerr << "step " << step << " loss " << loss << "\n";
            }
        };
        const auto result = toy::train_toy(config, data, resume, &hooks);
        result.checkpoint.save(o->out);
        if (!o->curve.empty()) {
            std::ofstream csv(o->curve);
            csv << "step,loss\n";
            for (const auto& p : result.curve) csv << p.step << "," << p.loss << "\n";
        }
        std::cout << nlohmann::json{{"checkpoint", o->out},
                                    {"steps", config.steps},
                                    {"seed", config.seed},
                                    {"final_loss", result.curve.empty() ? 0.0 : result.curve.back().loss}}
                         .dump(2)
                  << "\n";
    });
}

// ---- gen-dataset ----------------------------------------------------------------

void add_gen_dataset(CLI::App& app) {
    struct Opts {
        std::string out, params;
        std::size_t count = 100;
        std::size_t workers = 1;
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("gen-dataset", "Write a synthetic moving-sprite dataset");
    cmd->add_option("--out", o->out, "Dataset directory")->required();
    cmd->add_option("--count", o->count, "Number of scenes")->capture_default_str();
    cmd->add_option("--workers", o->workers, "Parallel writers")->capture_default_str();
    cmd->add_option("--params", o->params, "SceneParams JSON")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o->seed, "Base seed")->capture_default_str();
    cmd->callback([o] {
        const toy::SceneParams params =
            o->params.empty() ? toy::SceneParams{} : toy::scene_params_from_json(read_json_file(o->params));
        const auto m = toy::write_dataset(o->out, o->count, o->seed, params, o->workers);
        std::cout << nlohmann::json{{"dir", o->out}, {"scenes", m.seeds.size()}, {"base_seed", m.base_seed}}.dump(2)
                  << "\n";
    });
}

// ---- eval -------------------------------------------------------------------------

void add_eval(CLI::App& app) {
    struct Opts {
        std::string video, scene, reference, flow = "block_matching", flow_options, out;
        std::string space = "model";
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("eval", "Score a generated video: dynamic degree, CTD against a toy scene, camera metrics");
    cmd->add_option("--video", o->video, "Video tensor (.ttmt)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--space", o->space, "Value range of --video: model ([-1, 1]) | pixel ([0, 1])")
        ->capture_default_str();
    cmd->add_option("--scene", o->scene, "Toy scene JSON; enables CTD against its trajectories")
        ->check(CLI::ExistingFile);
    cmd->add_option("--reference", o->reference, "Reference video tensor in the same space; enables camera metrics")
        ->check(CLI::ExistingFile);
    cmd->add_option("--flow", o->flow, "Flow provider")->capture_default_str();
    cmd->add_option("--flow-options", o->flow_options, "Flow provider options as JSON");
    cmd->add_option("--out", o->out, "Write the metrics JSON here");
    cmd->add_option("--seed", o->seed, "Recorded in the metrics JSON; evaluation is deterministic");
    cmd->callback([o] {
        if (o->space != "model" && o->space != "pixel") throw ValidationError("eval.space", "model or pixel");
        const auto to_pixels = [&](FloatTensor t) { return o->space == "model" ? toy::to_pixel_space(t) : t; };
        const Video video = to_pixels(read_float_tensor(o->video));
        const auto options = o->flow_options.empty() ? nlohmann::json::object() : nlohmann::json::parse(o->flow_options);
        const auto flow = eval::make_flow_provider(o->flow, options);

        const auto dyn = eval::dynamic_degree(video, *flow);
        nlohmann::json j = {{"video", o->video},
                            {"flow", flow->name()},
                            {"dynamic", dyn.dynamic},
                            {"dynamic_score", dyn.score},
                            {"dynamic_threshold", dyn.threshold},
                            {"seed", o->seed}};
        if (!o->scene.empty()) {
            const auto scene = toy::sprite_scene_from_json(read_json_file(o->scene));
            const auto c = toy::make_scene_case(scene);
            const auto m = eval::evaluate_clip(video, c.objects, *flow);
            j["ctd"] = m.ctd;
            j["bg_obj_ctd"] = m.bg_obj_ctd;
            j["lost_ratio"] = m.lost_ratio;
            j["tracking_failed"] = m.tracking_failed;
        }
        if (!o->reference.empty()) {
            const auto cm = eval::camera_metrics(video, to_pixels(read_float_tensor(o->reference)), *flow);
            j["mse"] = cm.mse;
            j["ssim"] = cm.ssim;
            j["flow_mse"] = cm.flow_mse;
        }
        if (!o->out.empty()) write_json_file(o->out, j);
        std::cout << j.dump(2) << "\n";
    });
}

// ---- serve --------------------------------------------------------------------------

service::Service* g_service = nullptr;

void handle_signal(int) {
    if (g_service) g_service->stop();
}

void add_serve(CLI::App& app) {
    struct Opts {
        std::string config, storage, checkpoint, host;
        int port = -1;
        int workers = 0;
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("serve", "Run the HTTP project and job service");
    cmd->add_option("--config", o->config, "Service config JSON")->check(CLI::ExistingFile);
    cmd->add_option("--host", o->host, "Bind address");
    cmd->add_option("--port", o->port, "Port (0 picks a free one)");
    cmd->add_option("--storage", o->storage, "Storage root");
    cmd->add_option("--checkpoint", o->checkpoint, "Toy denoiser checkpoint for jobs");
    cmd->add_option("--workers", o->workers, "Job worker threads");
    cmd->add_option("--seed", o->seed, "Unused; each job carries its own sampler seed");
    cmd->callback([o] {
        auto config = service::load_service_config(o->config.empty() ? std::nullopt
                                                                     : std::optional<fs::path>(o->config));
        if (!o->host.empty()) config.host = o->host;
        if (o->port >= 0) config.port = o->port;
        if (!o->storage.empty()) config.storage_root = o->storage;
        if (!o->checkpoint.empty()) config.checkpoint = o->checkpoint;
        if (o->workers > 0) config.workers = o->workers;
        service::Service svc(config);
        g_service = &svc;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        const int port = svc.start();
        std::cout << "listening on " << config.host << ":" << port << std::endl;
        svc.wait();
        svc.stop();
        g_service = nullptr;
    });
}

}  // namespace

void add_commands(CLI::App& app) {
    add_warp(app);
    add_camera_warp(app);
    add_generate(app);
    add_ablate(app);
    add_train(app);
    add_gen_dataset(app);
    add_eval(app);
    add_serve(app);
}

}  // namespace ttm::cli
