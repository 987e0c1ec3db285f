#include "ttm/eval/metrics.hpp"

#include <cmath>

#include "ttm/common/error.hpp"

namespace ttm::eval {

double TrackResult::lost_ratio() const {
    if (lost.empty()) return 0.0;
    std::size_t n = 0;
    for (bool b : lost) n += b ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(lost.size());
}

double ctd(const Trajectory& track, const Trajectory& target, const std::vector<bool>& lost) {
    if (track.size() != target.size()) {
        throw ValidationError("ctd.length", "track has " + std::to_string(track.size()) + " frames, target " +
                                                std::to_string(target.size()));
    }
    if (!lost.empty() && lost.size() != track.size()) throw ValidationError("ctd.lost_length", "lost flags length");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < track.size(); ++t) {
        if (!lost.empty() && lost[t]) continue;
        sum += std::hypot(track[t][0] - target[t][0], track[t][1] - target[t][1]);
        ++n;
    }
    if (n == 0) throw ValidationError("ctd.empty", "no tracked frames");
    return sum / static_cast<double>(n);
}

double bg_obj_ctd(const TrackResult& tr) {
    const std::size_t T = tr.object.size();
    if (T < 2) throw ValidationError("bg_obj_ctd.length", "need at least 2 frames");
    if (tr.grid.empty()) throw ValidationError("bg_obj_ctd.grid", "no background points");
    for (const auto& g : tr.grid) {
        if (g.size() != T) throw ValidationError("bg_obj_ctd.length", "grid and object tracks differ in length");
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 1; t < T; ++t) {
        if (!tr.lost.empty() && tr.lost[t]) continue;
        const double ox = tr.object[t][0] - tr.object[0][0], oy = tr.object[t][1] - tr.object[0][1];
        for (const auto& g : tr.grid) {
            sum += std::hypot(g[t][0] - g[0][0] - ox, g[t][1] - g[0][1] - oy);
            ++n;
        }
    }
    if (n == 0) throw ValidationError("bg_obj_ctd.empty", "object lost on every frame after the first");
    return sum / static_cast<double>(n);
}

Trajectory trajectory_rescale(const Trajectory& traj, const ResizeAndPad& p) {
    if (p.scale == 0.0 || !std::isfinite(p.scale)) throw ValidationError("ResizeAndPad.scale", "scale must be nonzero");
    Trajectory out;
    out.reserve(traj.size());
    for (const auto& q : traj) out.push_back({p.scale * q[0] + p.offset[0], p.scale * q[1] + p.offset[1]});
    return out;
}

Trajectory trajectory_rescale_inverse(const Trajectory& traj, const ResizeAndPad& p) {
    if (p.scale == 0.0 || !std::isfinite(p.scale)) throw ValidationError("ResizeAndPad.scale", "scale must be nonzero");
    Trajectory out;
    out.reserve(traj.size());
    for (const auto& q : traj) out.push_back({(q[0] - p.offset[0]) / p.scale, (q[1] - p.offset[1]) / p.scale});
    return out;
}

}  // namespace ttm::eval
