#include "ttm/eval/tracker.hpp"

#include <cmath>
#include <limits>

#include "ttm/common/error.hpp"
#include "ttm/motion/warp.hpp"

namespace ttm::eval {
namespace {

Point match_template(const Video& v, std::size_t prev, std::size_t next, Point at, const TrackerConfig& cfg) {
    const int H = static_cast<int>(v.dim(2)), W = static_cast<int>(v.dim(3)), C = static_cast<int>(v.dim(1));
    const int cx = static_cast<int>(std::lround(at[0])), cy = static_cast<int>(std::lround(at[1]));
    double best = std::numeric_limits<double>::infinity();
    int bx = 0, by = 0;
    for (int r2 = 0; r2 <= 2 * cfg.search_radius * cfg.search_radius; ++r2)
        for (int dy = -cfg.search_radius; dy <= cfg.search_radius; ++dy)
            for (int dx = -cfg.search_radius; dx <= cfg.search_radius; ++dx) {
                if (dx * dx + dy * dy != r2) continue;
                double ssd = 0.0;
                int n = 0;
                for (int py = -cfg.patch_half; py <= cfg.patch_half; ++py)
                    for (int px = -cfg.patch_half; px <= cfg.patch_half; ++px) {
                        const int ax = cx + px, ay = cy + py, bx2 = ax + dx, by2 = ay + dy;
                        if (ax < 0 || ay < 0 || ax >= W || ay >= H || bx2 < 0 || by2 < 0 || bx2 >= W || by2 >= H) continue;
                        for (int c = 0; c < C; ++c) {
                            const double d =
                                double(v.at({prev, std::size_t(c), std::size_t(ay), std::size_t(ax)})) -
                                v.at({next, std::size_t(c), std::size_t(by2), std::size_t(bx2)});
                            ssd += d * d;
                        }
                        ++n;
                    }
                if (n == 0) continue;
                ssd /= n;
                if (ssd < best) {
                    best = ssd;
                    bx = dx;
                    by = dy;
                }
            }
    return {at[0] + bx, at[1] + by};
}

}  // namespace

TrackResult centroid_tracker(const Video& video, const Mask& initial_mask, const TrackerConfig& cfg) {
    if (video.rank() != 4 || video.dim(1) != 3) throw ValidationError("Video.shape", "video must be (F, 3, H, W)");
    const std::size_t F = video.dim(0), H = video.dim(2), W = video.dim(3);
    if (initial_mask.rank() != 2 || initial_mask.dim(0) != H || initial_mask.dim(1) != W) {
        throw ValidationError("tracker.mask_shape", "initial mask must be (H, W) of the video");
    }
    if (count_nonzero(initial_mask) == 0) throw ValidationError("tracker.mask_empty", "initial mask is empty");

    std::array<double, 3> color{0, 0, 0};
    std::size_t n = 0;
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            if (!initial_mask.at({y, x})) continue;
            for (std::size_t c = 0; c < 3; ++c) color[c] += video.at({0, c, y, x});
            ++n;
        }
    for (auto& c : color) c /= static_cast<double>(n);

    TrackResult tr;
    tr.object.push_back(motion::mask_centroid(initial_mask));
    tr.lost.push_back(false);
    const double thr2 = cfg.color_threshold * cfg.color_threshold;
    for (std::size_t f = 1; f < F; ++f) {
        double sx = 0, sy = 0;
        std::size_t k = 0;
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x) {
                double d2 = 0;
                for (std::size_t c = 0; c < 3; ++c) {
                    const double d = video.at({f, c, y, x}) - color[c];
                    d2 += d * d;
                }
                if (d2 <= thr2) {
                    sx += static_cast<double>(x);
                    sy += static_cast<double>(y);
                    ++k;
                }
            }
        if (k == 0) {
            tr.object.push_back(tr.object.back());
            tr.lost.push_back(true);
        } else {
            tr.object.push_back({sx / static_cast<double>(k), sy / static_cast<double>(k)});
            tr.lost.push_back(false);
        }
    }

    for (int gy = 0; gy < cfg.grid; ++gy)
        for (int gx = 0; gx < cfg.grid; ++gx) {
            Trajectory t;
            t.push_back({std::floor((gx + 0.5) * static_cast<double>(W) / cfg.grid),
                         std::floor((gy + 0.5) * static_cast<double>(H) / cfg.grid)});
            for (std::size_t f = 1; f < F; ++f) t.push_back(match_template(video, f - 1, f, t.back(), cfg));
            tr.grid.push_back(std::move(t));
        }
    return tr;
}

}  // namespace ttm::eval
