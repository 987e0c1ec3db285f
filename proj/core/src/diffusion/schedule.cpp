#include "ttm/diffusion/schedule.hpp"

#include <cmath>
#include <numbers>

#include "ttm/common/error.hpp"
#include "ttm/common/hash.hpp"

namespace ttm::diffusion {

std::string_view to_string(ScheduleKind kind) {
    return kind == ScheduleKind::Linear ? "linear" : "cosine";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
    if (name == "linear") return ScheduleKind::Linear;
    if (name == "cosine") return ScheduleKind::Cosine;
    throw ValidationError("NoiseSchedule.kind", "unknown schedule kind '" + std::string(name) + "'");
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, std::vector<double> alpha_bar)
    : kind_(kind), alpha_bar_(std::move(alpha_bar)) {
    ViolationList v;
    v.check(alpha_bar_.size() >= 3, "NoiseSchedule.steps");
    v.check(!alpha_bar_.empty() && alpha_bar_.front() == 1.0, "NoiseSchedule.alpha_bar_zero");
    bool decreasing = true;
    for (std::size_t t = 1; t < alpha_bar_.size(); ++t) {
        decreasing &= alpha_bar_[t] < alpha_bar_[t - 1] && alpha_bar_[t] > 0.0;
    }
    v.check(decreasing, "NoiseSchedule.strictly_decreasing");
    v.throw_if_any("noise schedule");
}

double NoiseSchedule::alpha(int t) const { return alpha_bar(t) / alpha_bar(t - 1); }
double NoiseSchedule::beta(int t) const { return 1.0 - alpha(t); }

double NoiseSchedule::posterior_variance(int t) const {
    return (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t)) * beta(t);
}

std::string NoiseSchedule::hash() const {
    std::string bytes(to_string(kind_));
    bytes += ':';
    bytes += std::to_string(steps());
    bytes.append(reinterpret_cast<const char*>(alpha_bar_.data()), alpha_bar_.size() * sizeof(double));
    return sha256_hex(bytes);
}

NoiseSchedule make_schedule(ScheduleKind kind, int steps) {
    if (steps < 2) throw ValidationError("NoiseSchedule.steps", "T must be at least 2");
    const double T = steps;
    std::vector<double> ab(static_cast<std::size_t>(steps) + 1);
    ab[0] = 1.0;
    if (kind == ScheduleKind::Linear) {
        const double lo = 0.1 / T, hi = 20.0 / T;
        for (int t = 1; t <= steps; ++t) {
            const double beta = lo + (hi - lo) * (t - 1) / (T - 1);
            ab[t] = ab[t - 1] * (1.0 - std::min(beta, 0.999));
        }
    } else {
        constexpr double s = 0.008;
        const auto f = [&](double t) {
            const double c = std::cos((t / T + s) / (1.0 + s) * std::numbers::pi / 2.0);
            return c * c;
        };
        for (int t = 1; t <= steps; ++t) {
            const double beta = std::min(1.0 - f(t) / f(t - 1), 0.999);
            ab[t] = ab[t - 1] * (1.0 - beta);
        }
    }
    return NoiseSchedule(kind, std::move(ab));
}

nlohmann::json to_json(const NoiseSchedule& schedule) {
    return {{"kind", to_string(schedule.kind())},
            {"steps", schedule.steps()},
            {"alpha_bar", schedule.alpha_bars()},
            {"hash", schedule.hash()}};
}

NoiseSchedule schedule_from_json(const nlohmann::json& doc) {
    try {
        return NoiseSchedule(parse_schedule_kind(doc.at("kind").get<std::string>()),
                             doc.at("alpha_bar").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("NoiseSchedule.schema", e.what());
    }
}

}  // namespace ttm::diffusion
