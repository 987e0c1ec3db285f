#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ttm/common/tensor.hpp"

namespace ttm {

/// PNG decode to a (3, H, W) image in [0, 1]. Gray and alpha inputs are
/// expanded/dropped; 16-bit inputs are reduced to 8 bits.
Image read_png(const std::filesystem::path& path);
Image decode_png(std::string_view bytes);

/// 8-bit RGB PNG encode; values are clamped to [0, 1] and rounded.
void write_png(const std::filesystem::path& path, const Image& image);
std::string encode_png(const Image& image);

/// Single-channel 8-bit PNG of a binary mask (0 / 255).
void write_mask_png(const std::filesystem::path& path, const Mask& mask);
Mask read_mask_png(const std::filesystem::path& path);

/// Portable float map (single channel "Pf"), used for depth maps.
FloatTensor read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const FloatTensor& map);
FloatTensor decode_pfm(std::string_view bytes);
std::string encode_pfm(const FloatTensor& map);

/// Writes frame_0000.png ... and mask_0000.png ... into `dir`.
void write_frame_sequence(const std::filesystem::path& dir, const Video& frames,
                          const MaskVideo* masks = nullptr);

/// Zero-padded frame filename, e.g. frame_0007.png.
std::string frame_filename(std::string_view stem, std::size_t index);

}  // namespace ttm
