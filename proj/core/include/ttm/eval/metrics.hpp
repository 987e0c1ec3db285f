#pragma once

#include <array>
#include <vector>

#include "ttm/common/tensor.hpp"

namespace ttm::eval {

using Point = std::array<double, 2>;  // (x, y) pixels
using Trajectory = std::vector<Point>;

/// Object track o_t plus background grid tracks p_{j,t}. Frames listed in
/// `lost` carry no valid object position.
struct TrackResult {
    Trajectory object;
    std::vector<Trajectory> grid;
    std::vector<bool> lost;

    std::size_t frames() const { return object.size(); }
    double lost_ratio() const;
};

/// Mean over frames of |o_t - target_t|. Frames flagged in `lost` (optional,
/// same length) are skipped.
double ctd(const Trajectory& track, const Trajectory& target, const std::vector<bool>& lost = {});

/// Mean over t >= 2 and grid points of |(p_{j,t} - p_{j,1}) - (o_t - o_1)|.
/// Lost object frames are skipped.
double bg_obj_ctd(const TrackResult& track);

/// Resize-and-pad mapping p' = scale * p + offset, applied to (x, y).
struct ResizeAndPad {
    double scale = 1.0;
    Point offset{0.0, 0.0};
};

Trajectory trajectory_rescale(const Trajectory& trajectory, const ResizeAndPad& params);
Trajectory trajectory_rescale_inverse(const Trajectory& trajectory, const ResizeAndPad& params);

}  // namespace ttm::eval
