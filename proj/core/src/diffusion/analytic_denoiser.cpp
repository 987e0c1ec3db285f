#include <cmath>

#include "ttm/common/hash.hpp"
#include "ttm/diffusion/denoiser.hpp"

namespace ttm::diffusion {

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(NoiseSchedule schedule, double mean, double variance)
    : schedule_(std::move(schedule)), mean_(mean), variance_(variance) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
        throw ValidationError("AnalyticGaussianDenoiser.variance", "variance must be finite and >= 0");
    }
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(NoiseSchedule schedule, Video mean, double variance)
    : AnalyticGaussianDenoiser(std::move(schedule), 0.0, variance) {
    mean_field_ = std::move(mean);
}

Video AnalyticGaussianDenoiser::predict_noise(const VideoState& state, const Image&,
                                              const std::optional<std::string>&) const {
    if (mean_field_ && !mean_field_->same_shape(state.values)) {
        throw ValidationError("AnalyticGaussianDenoiser.shape", "mean field shape differs from state");
    }
    const double ab = schedule_.alpha_bar(state.t);
    const double a = std::sqrt(ab);
    const double sigma2 = 1.0 - ab;
    const double gain = std::sqrt(sigma2) / (ab * variance_ + sigma2);
    Video out(state.values.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double mu = mean_field_ ? (*mean_field_)[i] : mean_;
        out[i] = static_cast<float>(gain * (state.values[i] - a * mu));
    }
    return out;
}

std::string AnalyticGaussianDenoiser::fingerprint() const {
    std::string id = "analytic-gaussian:" + schedule_.hash() + ":" + std::to_string(variance_) + ":";
    id += mean_field_ ? content_hash(*mean_field_) : std::to_string(mean_);
    return sha256_hex(id);
}

}  // namespace ttm::diffusion
