#include "ttm/sampler/manifest.hpp"

#include <fstream>

#include "ttm/common/error.hpp"

namespace ttm::sampler {
namespace {

nlohmann::json ref_json(const InputRef& r) { return {{"path", r.path}, {"hash", r.hash}}; }

InputRef ref_from(const nlohmann::json& j) {
    if (j.is_null()) return {};
    return {j.value("path", std::string()), j.value("hash", std::string())};
}

}  // namespace

nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json j = {
        {"version", kRunManifestVersion},
        {"config", to_json(m.config)},
        {"schedule", {{"kind", diffusion::to_string(m.schedule_kind)}, {"steps", m.steps}, {"hash", m.schedule_hash}}},
        {"inputs",
         {{"reference", ref_json(m.reference)},
          {"mask", ref_json(m.mask)},
          {"condition", ref_json(m.condition)},
          {"checkpoint", ref_json(m.checkpoint)}}},
        {"denoiser", {{"kind", m.denoiser}, {"params", m.denoiser_params}}},
    };
    j["result_hash"] = m.result_hash ? nlohmann::json(*m.result_hash) : nlohmann::json(nullptr);
    return j;
}

RunManifest run_manifest_from_json(const nlohmann::json& j) {
    try {
        if (j.at("version").get<int>() != kRunManifestVersion) {
            throw ValidationError("RunManifest.version", "unsupported manifest version");
        }
        RunManifest m;
        m.config = sampler_config_from_json(j.at("config"));
        const auto& s = j.at("schedule");
        m.schedule_kind = diffusion::parse_schedule_kind(s.at("kind").get<std::string>());
        m.steps = s.at("steps").get<int>();
        m.schedule_hash = s.value("hash", std::string());
        const auto& in = j.at("inputs");
        m.reference = ref_from(in.at("reference"));
        m.mask = ref_from(in.at("mask"));
        m.condition = ref_from(in.at("condition"));
        m.checkpoint = ref_from(in.value("checkpoint", nlohmann::json()));
        const auto& d = j.at("denoiser");
        m.denoiser = d.at("kind").get<std::string>();
        m.denoiser_params = d.value("params", nlohmann::json::object());
        if (j.contains("result_hash") && !j["result_hash"].is_null()) {
            m.result_hash = j["result_hash"].get<std::string>();
        }
        if (m.denoiser != "toy" && m.denoiser != "analytic") {
            throw ValidationError("RunManifest.denoiser", "unknown denoiser '" + m.denoiser + "'");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("RunManifest.schema", e.what());
    }
}

RunManifest read_run_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("RunManifest.schema", e.what());
    }
    return run_manifest_from_json(j);
}

void write_run_manifest(const std::filesystem::path& path, const RunManifest& m) {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write manifest " + path.string());
    out << to_json(m).dump(2) << '\n';
}

}  // namespace ttm::sampler
