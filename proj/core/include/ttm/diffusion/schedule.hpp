#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ttm::diffusion {

enum class ScheduleKind { Linear, Cosine };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

/// Discrete schedule over steps 0..T. alpha_bar[0] == 1 and alpha_bar is
/// strictly decreasing; step t has beta_t = 1 - alpha_bar[t] / alpha_bar[t-1].
class NoiseSchedule {
public:
    NoiseSchedule(ScheduleKind kind, std::vector<double> alpha_bar);

    ScheduleKind kind() const noexcept { return kind_; }
    int steps() const noexcept { return static_cast<int>(alpha_bar_.size()) - 1; }
    const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

    double alpha_bar(int t) const { return alpha_bar_.at(static_cast<std::size_t>(t)); }
    double alpha(int t) const;
    double beta(int t) const;
    /// beta_tilde_t = (1 - alpha_bar[t-1]) / (1 - alpha_bar[t]) * beta_t.
    double posterior_variance(int t) const;

    /// SHA-256 over kind, T and the alpha_bar bit patterns.
    std::string hash() const;

private:
    ScheduleKind kind_;
    std::vector<double> alpha_bar_;
};

/// Linear: betas evenly spaced in [0.1/T, 20/T]. Cosine: the squared-cosine
/// cumulative schedule with offset 0.008 and betas capped at 0.999.
NoiseSchedule make_schedule(ScheduleKind kind = ScheduleKind::Cosine, int steps = 50);

nlohmann::json to_json(const NoiseSchedule& schedule);
NoiseSchedule schedule_from_json(const nlohmann::json& doc);

}  // namespace ttm::diffusion
