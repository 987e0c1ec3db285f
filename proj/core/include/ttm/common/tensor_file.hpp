#pragma once

#include <filesystem>
#include <string>

#include "ttm/common/tensor.hpp"

namespace ttm {

// Binary tensor container: "TTMT" magic, u32 version, u8 dtype (0 = f32, 1 = u8),
// u32 rank, u64 dims..., then little-endian element bytes.

void write_tensor(const std::filesystem::path& path, const FloatTensor& t);
void write_tensor(const std::filesystem::path& path, const MaskTensor& t);
FloatTensor read_float_tensor(const std::filesystem::path& path);
MaskTensor read_mask_tensor(const std::filesystem::path& path);

std::string encode_tensor(const FloatTensor& t);
std::string encode_tensor(const MaskTensor& t);
FloatTensor decode_float_tensor(std::string_view bytes);
MaskTensor decode_mask_tensor(std::string_view bytes);

}  // namespace ttm
