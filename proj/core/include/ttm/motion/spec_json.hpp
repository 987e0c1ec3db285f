#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttm/motion/motion_spec.hpp"

namespace ttm::motion {

inline constexpr int kMotionSpecVersion = 1;

/// Row-major run lengths alternating 0-runs and 1-runs, starting with a
/// (possibly empty) 0-run.
std::vector<std::uint32_t> rle_encode(const Mask& mask);
Mask rle_decode(const std::vector<std::uint32_t>& runs, std::size_t height, std::size_t width);

nlohmann::json to_json(const MotionSpec& spec);
/// Parses and schema-checks a MotionSpec document; invariants are checked by validate().
MotionSpec motion_spec_from_json(const nlohmann::json& doc);

MotionSpec read_motion_spec(const std::filesystem::path& path);
void write_motion_spec(const std::filesystem::path& path, const MotionSpec& spec);

}  // namespace ttm::motion
