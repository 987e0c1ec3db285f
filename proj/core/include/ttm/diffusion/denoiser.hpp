#pragma once

#include <optional>
#include <string>

#include "ttm/common/tensor.hpp"
#include "ttm/diffusion/noising.hpp"
#include "ttm/diffusion/schedule.hpp"

namespace ttm::diffusion {

/// Contract every denoiser satisfies: deterministic eps prediction with the
/// same shape as the state, finite for finite input. Implementations must be
/// safe for concurrent const calls.
class DenoiserAdapter {
public:
    virtual ~DenoiserAdapter() = default;

    virtual Video predict_noise(const VideoState& state, const Image& condition,
                                const std::optional<std::string>& text = std::nullopt) const = 0;

    /// Stable identifier of the denoiser's parameters, recorded in run manifests.
    virtual std::string fingerprint() const = 0;
};

/// Exact E[eps | x_t] when every element of x0 is independently
/// N(mean, variance):  sigma_t (x_t - a_t mean) / (a_t^2 variance + sigma_t^2).
class AnalyticGaussianDenoiser final : public DenoiserAdapter {
public:
    AnalyticGaussianDenoiser(NoiseSchedule schedule, double mean, double variance);
    /// Per-element means; `mean` must match the state shape at call time.
    AnalyticGaussianDenoiser(NoiseSchedule schedule, Video mean, double variance);

    Video predict_noise(const VideoState& state, const Image& condition,
                        const std::optional<std::string>& text = std::nullopt) const override;
    std::string fingerprint() const override;

private:
    NoiseSchedule schedule_;
    std::optional<Video> mean_field_;
    double mean_ = 0.0;
    double variance_;
};

}  // namespace ttm::diffusion
