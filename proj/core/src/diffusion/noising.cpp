#include "ttm/diffusion/noising.hpp"

#include <cmath>

namespace ttm::diffusion {
namespace {

void check_t(int t, const NoiseSchedule& schedule) {
    if (t < 0 || t > schedule.steps()) {
        throw ValidationError("VideoState.timestep", "timestep outside [0, T]");
    }
}

}  // namespace

VideoState forward_noise(const Video& x0, int t, const NoiseSchedule& schedule, Rng& rng) {
    check_t(t, schedule);
    if (t == 0) return {x0, 0};
    Video eps(x0.shape());
    rng.fill_normal(eps.values());
    return forward_noise_with(x0, t, schedule, eps);
}

VideoState forward_noise_with(const Video& x0, int t, const NoiseSchedule& schedule, const Video& eps) {
    check_t(t, schedule);
    if (t == 0) return {x0, 0};
    if (!eps.same_shape(x0)) throw ValidationError("forward_noise.shape", "eps shape differs from x0");
    const double a = std::sqrt(schedule.alpha_bar(t));
    const double b = std::sqrt(1.0 - schedule.alpha_bar(t));
    Video out(x0.shape());
    for (std::size_t i = 0; i < x0.size(); ++i) {
        out[i] = static_cast<float>(a * x0[i] + b * eps[i]);
    }
    return {std::move(out), t};
}

VideoState ddpm_step(const VideoState& state, const Video& noise_pred, const NoiseSchedule& schedule,
                     Rng& rng) {
    const int t = state.t;
    if (t < 1 || t > schedule.steps()) {
        throw ValidationError("ddpm_step.timestep", "ddpm_step needs 1 <= t <= T");
    }
    if (!noise_pred.same_shape(state.values)) {
        throw ValidationError("ddpm_step.shape", "noise prediction shape differs from state");
    }
    const double alpha = schedule.alpha(t);
    const double eps_coef = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    const double sigma = t > 1 ? std::sqrt(schedule.posterior_variance(t)) : 0.0;

    Video out(state.values.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x = (state.values[i] - eps_coef * noise_pred[i]) * inv_sqrt_alpha;
        if (t > 1) x += sigma * rng.normal();
        out[i] = static_cast<float>(x);
    }
    return {std::move(out), t - 1};
}

Video predict_x0(const VideoState& state, const Video& noise_pred, const NoiseSchedule& schedule) {
    const double ab = schedule.alpha_bar(state.t);
    const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
    Video out(state.values.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<float>((state.values[i] - b * noise_pred[i]) / a);
    }
    return out;
}

}  // namespace ttm::diffusion
