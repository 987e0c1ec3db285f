#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace ttm::sampler {

/// Named corners of the (t_weak, t_strong) plane. The sampler itself only
/// looks at the two clocks; the regime is checked for consistency with them.
enum class Regime {
    DualClock,                // t_strong <= t_weak
    SingleClock,              // t_strong == t_weak (plain SDEdit on V^w)
    RepaintStyle,             // t_strong == 0 (masked region pinned to the end)
    UnconstrainedBackground,  // t_weak == T
};

enum class ReferenceNoiseMode {
    FreshPerStep,   // new eps for every x^w_{t-1}
    SharedEpsilon,  // the initialization eps, rescaled per step
};

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view name);
std::string_view to_string(ReferenceNoiseMode mode);
ReferenceNoiseMode parse_reference_noise_mode(std::string_view name);

/// Reference clocks at T = 50 for the image-to-video setting.
inline constexpr int kDefaultTWeak = 36;
inline constexpr int kDefaultTStrong = 25;

struct SamplerConfig {
    int t_weak = kDefaultTWeak;
    int t_strong = kDefaultTStrong;
    Regime regime = Regime::DualClock;
    std::uint64_t seed = 0;
    ReferenceNoiseMode reference_noise = ReferenceNoiseMode::FreshPerStep;
    std::optional<std::string> text;

    friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

/// Throws ValidationError unless 0 <= t_strong <= t_weak <= steps and the
/// regime's constraint holds.
void validate(const SamplerConfig& config, int steps);

nlohmann::json to_json(const SamplerConfig& config);
SamplerConfig sampler_config_from_json(const nlohmann::json& doc);

}  // namespace ttm::sampler
