#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ttm/common/error.hpp"

namespace ttm {

/// Dense row-major tensor with a runtime shape. Values are owned.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, T fill = T{})
        : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

    Tensor(std::vector<std::size_t> shape, std::vector<T> values)
        : shape_(std::move(shape)), data_(std::move(values)) {
        if (data_.size() != element_count(shape_)) {
            throw ValidationError("tensor.shape", "value count does not match shape");
        }
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Offset of a multi-index; no bounds checks beyond rank.
    std::size_t offset(std::initializer_list<std::size_t> index) const noexcept {
        std::size_t off = 0;
        std::size_t axis = 0;
        for (std::size_t i : index) {
            off = off * shape_[axis++] + i;
        }
        return off;
    }

    T& at(std::initializer_list<std::size_t> index) noexcept { return data_[offset(index)]; }
    const T& at(std::initializer_list<std::size_t> index) const noexcept {
        return data_[offset(index)];
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

    static std::size_t element_count(const std::vector<std::size_t>& shape) noexcept {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                               [](std::size_t a, std::size_t b) { return a * b; });
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

using FloatTensor = Tensor<float>;
using MaskTensor = Tensor<std::uint8_t>;

/// (C, H, W) image, values nominally in [0, 1].
using Image = FloatTensor;
/// (H, W) binary mask, values in {0, 1}.
using Mask = MaskTensor;
/// (F, C, H, W) video or latent stack.
using Video = FloatTensor;
/// (F, H, W) binary mask video.
using MaskVideo = MaskTensor;

std::string shape_string(const std::vector<std::size_t>& shape);

inline Image make_image(std::size_t height, std::size_t width, float fill = 0.0f) {
    return Image({3, height, width}, fill);
}

inline Mask make_mask(std::size_t height, std::size_t width, std::uint8_t fill = 0) {
    return Mask({height, width}, fill);
}

/// Checks the source-image contract: shape (3, H, W), H, W >= 8, finite values in [0, 1].
void validate_source_image(const Image& image);

/// Extracts frame `f` of a (F, C, H, W) video as a (C, H, W) image.
Image video_frame(const Video& video, std::size_t f);
void set_video_frame(Video& video, std::size_t f, const Image& frame);

Mask mask_frame(const MaskVideo& masks, std::size_t f);
void set_mask_frame(MaskVideo& masks, std::size_t f, const Mask& mask);

/// Repeats `image` `frames` times along a new leading axis.
Video repeat_frames(const Image& image, std::size_t frames);
MaskVideo repeat_masks(const Mask& mask, std::size_t frames);

std::size_t count_nonzero(const MaskTensor& mask);

}  // namespace ttm
