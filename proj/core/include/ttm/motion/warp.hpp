#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttm/common/tensor.hpp"
#include "ttm/motion/motion_spec.hpp"

namespace ttm::motion {

/// Crude reference video plus its guidance mask video.
struct WarpedReference {
    Video frames;    // (F, 3, H, W), values in [0, 1]
    MaskVideo mask;  // (F, H, W)
    std::vector<std::string> warnings;

    std::size_t frame_count() const { return frames.empty() ? 0 : frames.dim(0); }
};

struct WarpResult {
    Image frame;
    Mask moved;  // destination pixels that received a splat
    Mask holes;  // vacated source pixels not re-covered by the moved region
    bool region_out_of_frame = false;
};

/// Source-space centroid (x, y) of a nonempty mask.
std::array<double, 2> mask_centroid(const Mask& mask);

/// Forward-splats the masked pixels of `image` under `transform` (about the
/// mask centroid) to their nearest destination pixel. Unmasked pixels keep
/// their source value; the moved region wins over background on overlap and
/// later source pixels (row-major) win among themselves.
WarpResult forward_warp(const Image& image, const Mask& mask0, const RigidTransform& transform,
                        const std::optional<ColorTransform>& appearance = std::nullopt);

/// Fills every hole pixel with the color of the nearest donor pixel
/// (Euclidean distance). Donors are pixels outside `holes` and outside
/// `exclude` (when given). Ties go to the first donor in row-major order.
/// Throws RuntimeError when no donor exists.
Image nn_inpaint(const Image& frame, const Mask& holes, const Mask* exclude = nullptr);

/// Builds V^w and M from a source image and a motion spec: per frame,
/// interpolate each region's transform, splat regions in declaration order,
/// then inpaint disocclusions from the background.
WarpedReference build_warped_reference(const Image& image, const MotionSpec& spec);

}  // namespace ttm::motion
