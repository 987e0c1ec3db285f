#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttm/diffusion/denoiser.hpp"
#include "ttm/diffusion/toy_network.hpp"

namespace ttm::diffusion {

inline constexpr int kCheckpointFormatVersion = 1;

/// Self-describing checkpoint: magic "TTMCKPT1", u64 header length, JSON
/// header (format version, schedule, architecture, tensor table, metadata),
/// then raw little-endian float32 parameters followed by optimizer state.
struct ToyCheckpoint {
    NoiseSchedule schedule;
    SpaceTimeConvNet<float> net;
    nlohmann::json metadata = nlohmann::json::object();
    std::vector<float> optimizer_state;  // empty for inference-only checkpoints

    std::string encode() const;
    static ToyCheckpoint decode(std::string_view bytes);
    void save(const std::filesystem::path& path) const;
    static ToyCheckpoint load(const std::filesystem::path& path);
};

/// Image-conditioned toy eps-predictor: the condition image enters as input
/// channels next to the noisy state. Text is accepted and ignored.
class ToyDenoiser final : public DenoiserAdapter {
public:
    ToyDenoiser(NoiseSchedule schedule, SpaceTimeConvNet<float> net);
    explicit ToyDenoiser(const ToyCheckpoint& checkpoint);

    Video predict_noise(const VideoState& state, const Image& condition,
                        const std::optional<std::string>& text = std::nullopt) const override;
    std::string fingerprint() const override { return fingerprint_; }

    const NoiseSchedule& schedule() const noexcept { return schedule_; }
    const SpaceTimeConvNet<float>& network() const noexcept { return net_; }

private:
    NoiseSchedule schedule_;
    SpaceTimeConvNet<float> net_;
    std::string fingerprint_;
};

/// (3, F*H*W) channel-major network output to a (F, 3, H, W) video.
Video toy_output_to_video(const SpaceTimeConvNet<float>::Matrix& out, std::size_t frames, std::size_t height,
                          std::size_t width);

}  // namespace ttm::diffusion
