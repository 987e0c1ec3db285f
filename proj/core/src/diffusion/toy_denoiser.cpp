#include "ttm/diffusion/toy_denoiser.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "ttm/common/hash.hpp"

namespace ttm::diffusion {
namespace {

constexpr char kMagic[8] = {'T', 'T', 'M', 'C', 'K', 'P', 'T', '1'};

nlohmann::json architecture_json(const ToyNetConfig& c) {
    return {{"kind", "space_time_conv"},
            {"hidden", c.hidden},
            {"depth", c.depth},
            {"feature_clamp", c.feature_clamp},
            {"input_channels", kToyInputChannels},
            {"output_channels", kToyOutputChannels}};
}

}  // namespace

std::string ToyCheckpoint::encode() const {
    std::vector<std::size_t> sizes;
    const auto blocks = net.parameter_blocks(sizes);
    nlohmann::json tensors = nlohmann::json::array();
    std::size_t offset = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        tensors.push_back({{"index", b}, {"count", sizes[b]}, {"offset", offset}});
        offset += sizes[b];
    }
    const nlohmann::json header = {{"format_version", kCheckpointFormatVersion},
                                   {"schedule", to_json(schedule)},
                                   {"architecture", architecture_json(net.config())},
                                   {"tensors", tensors},
                                   {"parameter_count", offset},
                                   {"optimizer_state_count", optimizer_state.size()},
                                   {"metadata", metadata}};
    const std::string text = header.dump();
    std::string out(kMagic, sizeof kMagic);
    const std::uint64_t len = text.size();
    out.append(reinterpret_cast<const char*>(&len), sizeof len);
    out += text;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        out.append(reinterpret_cast<const char*>(blocks[b]), sizes[b] * sizeof(float));
    }
    out.append(reinterpret_cast<const char*>(optimizer_state.data()), optimizer_state.size() * sizeof(float));
    return out;
}

ToyCheckpoint ToyCheckpoint::decode(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw ValidationError("checkpoint.magic", "not a toy denoiser checkpoint");
    }
    std::uint64_t len = 0;
    std::memcpy(&len, bytes.data() + sizeof kMagic, sizeof len);
    const std::size_t body = sizeof kMagic + sizeof len;
    if (bytes.size() < body + len) throw ValidationError("checkpoint.truncated", "header truncated");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(body, len));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("checkpoint.header", e.what());
    }
    if (header.value("format_version", 0) != kCheckpointFormatVersion) {
        throw ValidationError("checkpoint.version", "unsupported checkpoint format version");
    }
    const auto& arch = header.at("architecture");
    ToyNetConfig config{arch.at("hidden").get<int>(), arch.at("depth").get<int>(),
                        arch.at("feature_clamp").get<float>()};
    NoiseSchedule schedule = schedule_from_json(header.at("schedule"));
    ToyCheckpoint ckpt{schedule, SpaceTimeConvNet<float>(config, schedule.steps()),
                       header.value("metadata", nlohmann::json::object()), {}};

    std::vector<std::size_t> sizes;
    auto blocks = ckpt.net.parameter_blocks(sizes);
    std::size_t total = 0;
    for (std::size_t s : sizes) total += s;
    const std::size_t opt = header.value("optimizer_state_count", std::size_t{0});
    if (header.at("parameter_count").get<std::size_t>() != total ||
        bytes.size() != body + len + (total + opt) * sizeof(float)) {
        throw ValidationError("checkpoint.truncated", "parameter payload does not match architecture");
    }
    const char* p = bytes.data() + body + len;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        std::memcpy(blocks[b], p, sizes[b] * sizeof(float));
        p += sizes[b] * sizeof(float);
    }
    ckpt.optimizer_state.resize(opt);
    std::memcpy(ckpt.optimizer_state.data(), p, opt * sizeof(float));
    return ckpt;
}

void ToyCheckpoint::save(const std::filesystem::path& path) const {
    const std::string bytes = encode();
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw RuntimeError("cannot write " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw RuntimeError("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

ToyCheckpoint ToyCheckpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode(ss.str());
}

ToyDenoiser::ToyDenoiser(NoiseSchedule schedule, SpaceTimeConvNet<float> net)
    : schedule_(std::move(schedule)), net_(std::move(net)) {
    if (net_.steps() != schedule_.steps()) {
        throw ValidationError("ToyDenoiser.steps", "network time embedding does not match schedule T");
    }
    ToyCheckpoint probe{schedule_, net_, nlohmann::json::object(), {}};
    fingerprint_ = sha256_hex(probe.encode());
}

ToyDenoiser::ToyDenoiser(const ToyCheckpoint& checkpoint) : ToyDenoiser(checkpoint.schedule, checkpoint.net) {}

Video ToyDenoiser::predict_noise(const VideoState& state, const Image& condition,
                                 const std::optional<std::string>&) const {
    const auto& v = state.values;
    const auto feats =
        make_toy_features<float>(v, condition, state.t, schedule_, net_.config().feature_clamp);
    const int frames = static_cast<int>(v.dim(0)), h = static_cast<int>(v.dim(2)), w = static_cast<int>(v.dim(3));
    const auto out = net_.forward(feats, frames, h, w, state.t);
    return toy_output_to_video(out, v.dim(0), v.dim(2), v.dim(3));
}

Video toy_output_to_video(const SpaceTimeConvNet<float>::Matrix& out, std::size_t frames, std::size_t height,
                          std::size_t width) {
    const std::size_t hw = height * width;
    Video video({frames, 3, height, width});
    const float* src = out.data();
    for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t i = 0; i < hw; ++i)
            for (std::size_t c = 0; c < 3; ++c) video.data()[(f * 3 + c) * hw + i] = src[(f * hw + i) * 3 + c];
    return video;
}

}  // namespace ttm::diffusion
