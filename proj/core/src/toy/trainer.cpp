#include "ttm/toy/trainer.hpp"

#include <cmath>
#include <numbers>

#include "ttm/common/error.hpp"
#include "ttm/common/random.hpp"
#include "ttm/diffusion/noising.hpp"
#include "ttm/toy/dataset.hpp"

namespace ttm::toy {
namespace {

using Net = diffusion::SpaceTimeConvNet<float>;

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double learning_rate(const TrainConfig& c, int step) {
    if (step < c.warmup) return c.learning_rate * (step + 1) / c.warmup;
    const double progress = static_cast<double>(step - c.warmup) / std::max(1, c.steps - c.warmup);
    return c.learning_rate * (0.1 + 0.9 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

Video crop_video(const Video& v, std::size_t y0, std::size_t x0, std::size_t size) {
    const std::size_t F = v.dim(0), C = v.dim(1);
    Video out({F, C, size, size});
    for (std::size_t f = 0; f < F; ++f)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t y = 0; y < size; ++y) {
                const float* src = &v.at({f, c, y0 + y, x0});
                std::copy(src, src + size, &out.at({f, c, y, 0}));
            }
    return out;
}

}  // namespace

nlohmann::json to_json(const TrainConfig& c) {
    return {{"steps", c.steps},
            {"batch", c.batch},
            {"learning_rate", c.learning_rate},
            {"warmup", c.warmup},
            {"grad_clip", c.grad_clip},
            {"crop", c.crop},
            {"seed", c.seed},
            {"net", {{"hidden", c.net.hidden}, {"depth", c.net.depth}, {"feature_clamp", c.net.feature_clamp}}},
            {"schedule", diffusion::to_string(c.schedule)},
            {"schedule_steps", c.schedule_steps},
            {"log_every", c.log_every}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    try {
        TrainConfig c;
        c.steps = j.value("steps", c.steps);
        c.batch = j.value("batch", c.batch);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.warmup = j.value("warmup", c.warmup);
        c.grad_clip = j.value("grad_clip", c.grad_clip);
        c.crop = j.value("crop", c.crop);
        c.seed = j.value("seed", c.seed);
        if (j.contains("net")) {
            const auto& n = j["net"];
            c.net.hidden = n.value("hidden", c.net.hidden);
            c.net.depth = n.value("depth", c.net.depth);
            c.net.feature_clamp = n.value("feature_clamp", c.net.feature_clamp);
        }
        c.schedule = diffusion::parse_schedule_kind(j.value("schedule", std::string("cosine")));
        c.schedule_steps = j.value("schedule_steps", c.schedule_steps);
        c.log_every = j.value("log_every", c.log_every);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("TrainConfig.schema", e.what());
    }
}

TrainResult train_toy(const TrainConfig& config, const SceneSource& data,
                      const std::optional<diffusion::ToyCheckpoint>& resume, const TrainHooks* hooks) {
    ViolationList v;
    v.check(data.count > 0, "TrainData.nonempty");
    v.check(config.steps >= 1 && config.batch >= 1 && config.warmup >= 1, "TrainConfig.counts");
    v.check(config.learning_rate > 0 && config.grad_clip > 0, "TrainConfig.optimizer");
    v.check(config.crop >= 4, "TrainConfig.crop");
    v.check(config.log_every >= 1, "TrainConfig.log_every");
    v.throw_if_any("train config");

    const auto schedule = diffusion::make_schedule(config.schedule, config.schedule_steps);
    Rng init_rng = Rng::derive(config.seed, 0);
    Net net(config.net, schedule.steps(), init_rng);

    std::vector<std::size_t> sizes;
    auto params = net.parameter_blocks(sizes);
    std::size_t total = 0;
    for (auto s : sizes) total += s;
    std::vector<float> m(total, 0.0f), s2(total, 0.0f);
    int start = 0;
    std::vector<LossPoint> curve;

    if (resume) {
        const auto& meta = resume->metadata;
        if (!meta.contains("train_config") || train_config_from_json(meta["train_config"]) != config) {
            throw ValidationError("TrainConfig.resume_mismatch", "checkpoint was trained with a different config");
        }
        if (resume->optimizer_state.size() != 2 * total) {
            throw ValidationError("Checkpoint.optimizer_state", "optimizer state size mismatch");
        }
        net = resume->net;
        params = net.parameter_blocks(sizes);
        std::copy(resume->optimizer_state.begin(), resume->optimizer_state.begin() + static_cast<long>(total), m.begin());
        std::copy(resume->optimizer_state.begin() + static_cast<long>(total), resume->optimizer_state.end(), s2.begin());
        start = meta.value("train_step", 0);
        for (const auto& p : meta.value("loss_curve", nlohmann::json::array())) {
            curve.push_back({p.at(0).get<int>(), p.at(1).get<double>()});
        }
    }

    double window = 0.0;
    int window_n = 0;
    if (resume) {
        const auto w = resume->metadata.value("loss_window", nlohmann::json::array({0.0, 0}));
        window = w.at(0).get<double>();
        window_n = w.at(1).get<int>();
    }

    const auto snapshot = [&](int step) {
        diffusion::ToyCheckpoint ckpt{schedule, net, nlohmann::json::object(), {}};
        ckpt.optimizer_state = m;
        ckpt.optimizer_state.insert(ckpt.optimizer_state.end(), s2.begin(), s2.end());
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : curve) pts.push_back({p.step, p.loss});
        ckpt.metadata = {{"train_step", step},
                         {"train_config", to_json(config)},
                         {"loss_curve", pts},
                         {"loss_window", {window, window_n}}};
        return ckpt;
    };

    for (int step = start; step < config.steps; ++step) {
        Rng rng = Rng::derive(config.seed, 1 + static_cast<std::uint64_t>(step));
        auto grads = net.zero_gradients();
        double loss = 0.0;
        for (int b = 0; b < config.batch; ++b) {
            const std::size_t idx = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(data.count) - 1));
            const Video clip = data.clip(idx);
            const std::size_t H = clip.dim(2), W = clip.dim(3), F = clip.dim(0);
            const std::size_t crop = std::min<std::size_t>(static_cast<std::size_t>(config.crop), std::min(H, W));
            const std::size_t y0 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(H - crop)));
            const std::size_t x0 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(W - crop)));
            const Video x0v = crop_video(clip, y0, x0, crop);
            const Image cond = video_frame(x0v, 0);
            const int t = rng.uniform_int(1, schedule.steps());
            Video eps(x0v.shape());
            rng.fill_normal(eps.values());
            const auto xt = diffusion::forward_noise_with(x0v, t, schedule, eps);

            const auto feats = diffusion::make_toy_features<float>(xt.values, cond, t, schedule, config.net.feature_clamp);
            Net::Activations cache;
            const int fi = static_cast<int>(F), hi = static_cast<int>(crop);
            const Net::Matrix out = net.forward(feats, fi, hi, hi, t, &cache);
            // out is (3, F*h*w) channel-major; eps is (F, 3, h, w).
            Net::Matrix d_out(out.rows(), out.cols());
            const std::size_t hw = crop * crop;
            double sq = 0.0;
            const double n = static_cast<double>(eps.size());
            for (std::size_t f = 0; f < F; ++f)
                for (std::size_t c = 0; c < 3; ++c)
                    for (std::size_t i = 0; i < hw; ++i) {
                        const auto col = static_cast<Eigen::Index>(f * hw + i);
                        const double diff = out(static_cast<Eigen::Index>(c), col) - eps[(f * 3 + c) * hw + i];
                        sq += diff * diff;
                        d_out(static_cast<Eigen::Index>(c), col) =
                            static_cast<float>(2.0 * diff / (n * config.batch));
                    }
            loss += sq / n;
            net.backward(cache, d_out, t, grads);
        }
        loss /= config.batch;
        if (!std::isfinite(loss)) {
            throw RuntimeError("non-finite training loss at step " + std::to_string(step));
        }

        std::vector<std::size_t> gsizes;
        auto gblocks = Net::gradient_blocks(grads, gsizes);
        double norm2 = 0.0;
        for (std::size_t bI = 0; bI < gblocks.size(); ++bI)
            for (std::size_t i = 0; i < gsizes[bI]; ++i) norm2 += double(gblocks[bI][i]) * gblocks[bI][i];
        const double scale = std::min(1.0, config.grad_clip / (std::sqrt(norm2) + 1e-12));

        const double lr = learning_rate(config, step);
        const double bc1 = 1.0 - std::pow(kBeta1, step + 1), bc2 = 1.0 - std::pow(kBeta2, step + 1);
        std::size_t k = 0;
        for (std::size_t bI = 0; bI < params.size(); ++bI)
            for (std::size_t i = 0; i < sizes[bI]; ++i, ++k) {
                const double g = gblocks[bI][i] * scale;
                m[k] = static_cast<float>(kBeta1 * m[k] + (1.0 - kBeta1) * g);
                s2[k] = static_cast<float>(kBeta2 * s2[k] + (1.0 - kBeta2) * g * g);
                const double update = lr * (m[k] / bc1) / (std::sqrt(s2[k] / bc2) + kAdamEps);
                params[bI][i] = static_cast<float>(params[bI][i] - update);
            }

        window += loss;
        ++window_n;
        if ((step + 1) % config.log_every == 0 || step + 1 == config.steps) {
            curve.push_back({step + 1, window / window_n});
            window = 0.0;
            window_n = 0;
        }
        if (hooks && hooks->on_step) hooks->on_step(step + 1, loss);
        if (hooks && hooks->on_checkpoint && hooks->checkpoint_every > 0 && (step + 1) % hooks->checkpoint_every == 0 &&
            step + 1 < config.steps) {
            hooks->on_checkpoint(snapshot(step + 1));
        }
    }
    return {snapshot(config.steps), curve};
}

double heldout_eps_mse(const diffusion::DenoiserAdapter& denoiser, const diffusion::NoiseSchedule& schedule,
                       const SceneSource& data, std::uint64_t seed, int draws_per_clip) {
    if (data.count == 0 || draws_per_clip < 1) throw ValidationError("TrainData.nonempty", "no held-out clips");
    Rng rng(seed);
    double total = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < data.count; ++i) {
        const Video clip = data.clip(i);
        const Image cond = video_frame(clip, 0);
        for (int d = 0; d < draws_per_clip; ++d) {
            const int t = 1 + static_cast<int>((i * static_cast<std::size_t>(draws_per_clip) + static_cast<std::size_t>(d)) %
                                               static_cast<std::size_t>(schedule.steps()));
            Video eps(clip.shape());
            rng.fill_normal(eps.values());
            const auto xt = diffusion::forward_noise_with(clip, t, schedule, eps);
            const Video pred = denoiser.predict_noise(xt, cond);
            double sq = 0.0;
            for (std::size_t k = 0; k < eps.size(); ++k) sq += double(pred[k] - eps[k]) * (pred[k] - eps[k]);
            total += sq / static_cast<double>(eps.size());
            ++n;
        }
    }
    return total / static_cast<double>(n);
}

SceneSource sprite_source(std::uint64_t base_seed, std::size_t count, const SceneParams& params) {
    return {count, [base_seed, params](std::size_t i) {
                return to_model_space(render_scene(sample_scene(scene_seed(base_seed, i), params)).video);
            }};
}

}  // namespace ttm::toy
