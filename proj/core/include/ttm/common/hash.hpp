#pragma once

#include <span>
#include <string>
#include <string_view>

#include "ttm/common/tensor.hpp"

namespace ttm {

/// Lowercase hex SHA-256 of raw bytes.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view text);

/// Hash of shape plus element bytes; equal tensors hash equal.
template <typename T>
std::string content_hash(const Tensor<T>& t);

}  // namespace ttm
