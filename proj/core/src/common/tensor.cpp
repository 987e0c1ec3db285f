#include "ttm/common/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ttm {

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

void validate_source_image(const Image& image) {
    ViolationList v;
    v.check(image.rank() == 3 && image.dim(0) == 3, "SourceImage.shape");
    if (image.rank() == 3) {
        v.check(image.dim(1) >= 8 && image.dim(2) >= 8, "SourceImage.min_size");
    }
    const bool in_range = std::all_of(image.values().begin(), image.values().end(), [](float x) {
        return std::isfinite(x) && x >= 0.0f && x <= 1.0f;
    });
    v.check(in_range, "SourceImage.range");
    v.throw_if_any("source image");
}

Image video_frame(const Video& video, std::size_t f) {
    const std::size_t c = video.dim(1), h = video.dim(2), w = video.dim(3);
    Image out({c, h, w});
    const std::size_t n = c * h * w;
    std::memcpy(out.data(), video.data() + f * n, n * sizeof(float));
    return out;
}

void set_video_frame(Video& video, std::size_t f, const Image& frame) {
    const std::size_t n = frame.size();
    if (n != video.dim(1) * video.dim(2) * video.dim(3)) {
        throw ValidationError("video.frame_shape", "frame does not match video shape");
    }
    std::memcpy(video.data() + f * n, frame.data(), n * sizeof(float));
}

Mask mask_frame(const MaskVideo& masks, std::size_t f) {
    const std::size_t h = masks.dim(1), w = masks.dim(2);
    Mask out({h, w});
    std::memcpy(out.data(), masks.data() + f * h * w, h * w);
    return out;
}

void set_mask_frame(MaskVideo& masks, std::size_t f, const Mask& mask) {
    const std::size_t n = mask.size();
    if (n != masks.dim(1) * masks.dim(2)) {
        throw ValidationError("mask_video.frame_shape", "mask does not match mask video shape");
    }
    std::memcpy(masks.data() + f * n, mask.data(), n);
}

Video repeat_frames(const Image& image, std::size_t frames) {
    Video out({frames, image.dim(0), image.dim(1), image.dim(2)});
    for (std::size_t f = 0; f < frames; ++f) set_video_frame(out, f, image);
    return out;
}

MaskVideo repeat_masks(const Mask& mask, std::size_t frames) {
    MaskVideo out({frames, mask.dim(0), mask.dim(1)});
    for (std::size_t f = 0; f < frames; ++f) set_mask_frame(out, f, mask);
    return out;
}

std::size_t count_nonzero(const MaskTensor& mask) {
    return static_cast<std::size_t>(
        std::count_if(mask.values().begin(), mask.values().end(), [](auto v) { return v != 0; }));
}

}  // namespace ttm
