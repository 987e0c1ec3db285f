#include "ttm/motion/spec_json.hpp"

#include <fstream>

namespace ttm::motion {

using nlohmann::json;

std::vector<std::uint32_t> rle_encode(const Mask& mask) {
    std::vector<std::uint32_t> runs;
    std::uint8_t current = 0;
    std::uint32_t length = 0;
    for (std::uint8_t v : mask.values()) {
        const std::uint8_t bit = v ? 1 : 0;
        if (bit != current) {
            runs.push_back(length);
            current = bit;
            length = 0;
        }
        ++length;
    }
    runs.push_back(length);
    return runs;
}

Mask rle_decode(const std::vector<std::uint32_t>& runs, std::size_t height, std::size_t width) {
    Mask out = make_mask(height, width);
    std::size_t pos = 0;
    std::uint8_t bit = 0;
    for (std::uint32_t run : runs) {
        if (pos + run > out.size()) {
            throw ValidationError("MotionSpec.mask_rle", "run lengths exceed mask size");
        }
        std::fill_n(out.data() + pos, run, bit);
        pos += run;
        bit ^= 1;
    }
    if (pos != out.size()) throw ValidationError("MotionSpec.mask_rle", "run lengths do not cover mask");
    return out;
}

json to_json(const MotionSpec& spec) {
    json regions = json::array();
    for (const auto& region : spec.regions) {
        json keyframes = json::array();
        for (const auto& k : region.keyframes) {
            json kj = {{"frame", k.frame},
                       {"dx", k.transform.dx},
                       {"dy", k.transform.dy},
                       {"rotation", k.transform.rotation},
                       {"log_scale", k.transform.log_scale}};
            if (k.appearance) {
                kj["appearance"] = {{"matrix", k.appearance->matrix}, {"offset", k.appearance->offset}};
            }
            keyframes.push_back(std::move(kj));
        }
        regions.push_back({{"mask",
                            {{"height", region.mask.dim(0)},
                             {"width", region.mask.dim(1)},
                             {"rle", rle_encode(region.mask)}}},
                           {"keyframes", std::move(keyframes)}});
    }
    return {{"version", kMotionSpecVersion},
            {"image", spec.image_ref},
            {"frame_count", spec.frame_count},
            {"regions", std::move(regions)}};
}

MotionSpec motion_spec_from_json(const json& doc) {
    try {
        if (doc.value("version", 0) != kMotionSpecVersion) {
            throw ValidationError("MotionSpec.version", "unsupported motion spec version");
        }
        MotionSpec spec;
        spec.image_ref = doc.value("image", std::string{});
        spec.frame_count = doc.at("frame_count").get<int>();
        for (const auto& rj : doc.at("regions")) {
            MotionRegion region;
            const auto& mj = rj.at("mask");
            region.mask = rle_decode(mj.at("rle").get<std::vector<std::uint32_t>>(),
                                     mj.at("height").get<std::size_t>(), mj.at("width").get<std::size_t>());
            for (const auto& kj : rj.at("keyframes")) {
                Keyframe k;
                k.frame = kj.at("frame").get<int>();
                k.transform.dx = kj.value("dx", 0.0);
                k.transform.dy = kj.value("dy", 0.0);
                k.transform.rotation = kj.value("rotation", 0.0);
                k.transform.log_scale = kj.value("log_scale", 0.0);
                if (kj.contains("appearance")) {
                    ColorTransform c;
                    c.matrix = kj["appearance"].at("matrix").get<std::array<float, 9>>();
                    c.offset = kj["appearance"].at("offset").get<std::array<float, 3>>();
                    k.appearance = c;
                }
                region.keyframes.push_back(std::move(k));
            }
            spec.regions.push_back(std::move(region));
        }
        return spec;
    } catch (const json::exception& e) {
        throw ValidationError("MotionSpec.schema", e.what());
    }
}

MotionSpec read_motion_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("MotionSpec.schema", e.what());
    }
    return motion_spec_from_json(doc);
}

void write_motion_spec(const std::filesystem::path& path, const MotionSpec& spec) {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write " + path.string());
    out << to_json(spec).dump(2) << '\n';
}

}  // namespace ttm::motion
