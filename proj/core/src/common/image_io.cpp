#include "ttm/common/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ttm {
namespace {

std::uint8_t to_byte(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string encode_raw(const std::vector<std::uint8_t>& pixels, std::size_t h, std::size_t w,
                       png_uint_32 format) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = format;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw RuntimeError(std::string("png encode: ") + img.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw RuntimeError(std::string("png encode: ") + img.message);
    }
    out.resize(size);
    return out;
}

std::vector<std::uint8_t> decode_raw(std::string_view bytes, png_uint_32 format, std::size_t& h,
                                     std::size_t& w) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
        throw ValidationError("image.decode", std::string("undecodable PNG: ") + img.message);
    }
    img.format = format;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&img);
        throw ValidationError("image.decode", std::string("undecodable PNG: ") + img.message);
    }
    h = img.height;
    w = img.width;
    return pixels;
}

}  // namespace

Image decode_png(std::string_view bytes) {
    std::size_t h = 0, w = 0;
    const auto pixels = decode_raw(bytes, PNG_FORMAT_RGB, h, w);
    Image out({3, h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                out[(c * h + y) * w + x] = static_cast<float>(pixels[(y * w + x) * 3 + c]) / 255.0f;
    return out;
}

Image read_png(const std::filesystem::path& path) { return decode_png(read_file(path)); }

std::string encode_png(const Image& image) {
    if (image.rank() != 3 || image.dim(0) != 3) {
        throw ValidationError("image.shape", "expected (3, H, W)");
    }
    const std::size_t h = image.dim(1), w = image.dim(2);
    std::vector<std::uint8_t> pixels(h * w * 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                pixels[(y * w + x) * 3 + c] = to_byte(image[(c * h + y) * w + x]);
    return encode_raw(pixels, h, w, PNG_FORMAT_RGB);
}

void write_png(const std::filesystem::path& path, const Image& image) {
    write_file(path, encode_png(image));
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
    std::vector<std::uint8_t> pixels(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) pixels[i] = mask[i] ? 255 : 0;
    write_file(path, encode_raw(pixels, mask.dim(0), mask.dim(1), PNG_FORMAT_GRAY));
}

Mask read_mask_png(const std::filesystem::path& path) {
    std::size_t h = 0, w = 0;
    const auto pixels = decode_raw(read_file(path), PNG_FORMAT_GRAY, h, w);
    Mask out({h, w});
    for (std::size_t i = 0; i < pixels.size(); ++i) out[i] = pixels[i] >= 128 ? 1 : 0;
    return out;
}

FloatTensor read_pfm(const std::filesystem::path& path) { return decode_pfm(read_file(path)); }

FloatTensor decode_pfm(std::string_view data) {
    const std::string bytes(data);
    std::istringstream header(bytes);
    std::string magic;
    std::size_t w = 0, h = 0;
    double scale = 0;
    header >> magic >> w >> h >> scale;
    if (magic != "Pf" || !header || w == 0 || h == 0) {
        throw ValidationError("depth.format", "expected single-channel PFM (Pf)");
    }
    header.get();  // single whitespace after the scale line
    const auto offset = static_cast<std::size_t>(header.tellg());
    if (bytes.size() < offset + w * h * sizeof(float)) {
        throw ValidationError("depth.format", "truncated PFM payload");
    }
    const bool little_endian = scale < 0;
    FloatTensor out({h, w});
    for (std::size_t row = 0; row < h; ++row) {
        // PFM stores rows bottom-to-top.
        const std::size_t src_row = h - 1 - row;
        for (std::size_t x = 0; x < w; ++x) {
            std::uint32_t raw;
            std::memcpy(&raw, bytes.data() + offset + (src_row * w + x) * 4, 4);
            if (!little_endian) raw = __builtin_bswap32(raw);
            float v;
            std::memcpy(&v, &raw, 4);
            out[row * w + x] = v;
        }
    }
    return out;
}

void write_pfm(const std::filesystem::path& path, const FloatTensor& map) { write_file(path, encode_pfm(map)); }

std::string encode_pfm(const FloatTensor& map) {
    if (map.rank() != 2) throw ValidationError("depth.shape", "expected (H, W)");
    const std::size_t h = map.dim(0), w = map.dim(1);
    std::string out = "Pf\n" + std::to_string(w) + " " + std::to_string(h) + "\n-1.0\n";
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t src_row = h - 1 - row;
        out.append(reinterpret_cast<const char*>(map.data() + src_row * w), w * sizeof(float));
    }
    return out;
}

std::string frame_filename(std::string_view stem, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%04zu.png", index);
    return std::string(stem) + buf;
}

void write_frame_sequence(const std::filesystem::path& dir, const Video& frames,
                          const MaskVideo* masks) {
    std::filesystem::create_directories(dir);
    for (std::size_t f = 0; f < frames.dim(0); ++f) {
        write_png(dir / frame_filename("frame", f), video_frame(frames, f));
        if (masks) write_mask_png(dir / frame_filename("mask", f), mask_frame(*masks, f));
    }
}

}  // namespace ttm
