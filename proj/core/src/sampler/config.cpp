#include "ttm/sampler/config.hpp"

#include "ttm/common/error.hpp"

namespace ttm::sampler {

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::DualClock: return "dual_clock";
        case Regime::SingleClock: return "single_clock";
        case Regime::RepaintStyle: return "repaint_style";
        case Regime::UnconstrainedBackground: return "unconstrained_bg";
    }
    return "dual_clock";
}

Regime parse_regime(std::string_view name) {
    if (name == "dual_clock") return Regime::DualClock;
    if (name == "single_clock") return Regime::SingleClock;
    if (name == "repaint_style") return Regime::RepaintStyle;
    if (name == "unconstrained_bg") return Regime::UnconstrainedBackground;
    throw ValidationError("SamplerConfig.regime", "unknown regime '" + std::string(name) + "'");
}

std::string_view to_string(ReferenceNoiseMode mode) {
    return mode == ReferenceNoiseMode::FreshPerStep ? "fresh_per_step" : "shared_epsilon";
}

ReferenceNoiseMode parse_reference_noise_mode(std::string_view name) {
    if (name == "fresh_per_step") return ReferenceNoiseMode::FreshPerStep;
    if (name == "shared_epsilon") return ReferenceNoiseMode::SharedEpsilon;
    throw ValidationError("SamplerConfig.reference_noise_mode",
                          "unknown reference noise mode '" + std::string(name) + "'");
}

void validate(const SamplerConfig& c, int steps) {
    ViolationList v;
    v.check(0 <= c.t_strong && c.t_strong <= c.t_weak && c.t_weak <= steps, "SamplerConfig.clock_order");
    switch (c.regime) {
        case Regime::SingleClock: v.check(c.t_strong == c.t_weak, "SamplerConfig.single_clock"); break;
        case Regime::RepaintStyle: v.check(c.t_strong == 0, "SamplerConfig.repaint_style"); break;
        case Regime::UnconstrainedBackground:
            v.check(c.t_weak == steps, "SamplerConfig.unconstrained_bg");
            break;
        case Regime::DualClock: break;
    }
    v.throw_if_any("sampler config");
}

nlohmann::json to_json(const SamplerConfig& c) {
    nlohmann::json j = {{"t_weak", c.t_weak},
                        {"t_strong", c.t_strong},
                        {"regime", to_string(c.regime)},
                        {"seed", c.seed},
                        {"reference_noise_mode", to_string(c.reference_noise)}};
    if (c.text) j["text"] = *c.text;
    return j;
}

SamplerConfig sampler_config_from_json(const nlohmann::json& j) {
    try {
        SamplerConfig c;
        c.t_weak = j.value("t_weak", kDefaultTWeak);
        c.t_strong = j.value("t_strong", kDefaultTStrong);
        c.regime = parse_regime(j.value("regime", std::string("dual_clock")));
        c.seed = j.value("seed", std::uint64_t{0});
        c.reference_noise = parse_reference_noise_mode(j.value("reference_noise_mode", std::string("fresh_per_step")));
        if (j.contains("text") && !j["text"].is_null()) c.text = j["text"].get<std::string>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("SamplerConfig.schema", e.what());
    }
}

}  // namespace ttm::sampler
