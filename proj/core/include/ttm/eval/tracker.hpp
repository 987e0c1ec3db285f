#pragma once

#include "ttm/common/tensor.hpp"
#include "ttm/eval/metrics.hpp"

namespace ttm::eval {

struct TrackerConfig {
    double color_threshold = 0.3;  // Euclidean RGB distance to the object's mean color
    int grid = 16;                 // grid x grid background points
    int patch_half = 4;            // 9x9 template
    int search_radius = 6;
    double max_lost_ratio = 0.2;
};

/// Centroid tracker for chromatically separable objects. The object track
/// starts at the centroid of `initial_mask` (frame 0); later frames use the
/// centroid of pixels within the color threshold of the masked mean color.
/// Background points start on a uniform grid of cell centers and follow
/// frame-to-frame SSD template matching. Frames with no matching pixel are
/// flagged lost and keep the previous position.
TrackResult centroid_tracker(const Video& video, const Mask& initial_mask, const TrackerConfig& config = {});

}  // namespace ttm::eval
