#include "ttm/motion/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace ttm::motion {
namespace {

struct Offset {
    int dy;
    int dx;
    int dist2;
};

// All offsets within `radius`, ordered by (distance, dy, dx). Scanning in this
// order visits candidates by distance with row-major tie-breaking.
const std::vector<Offset>& sorted_offsets() {
    static const std::vector<Offset> offsets = [] {
        constexpr int radius = 12;
        std::vector<Offset> out;
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx)
                if (dy * dy + dx * dx <= radius * radius) out.push_back({dy, dx, dy * dy + dx * dx});
        std::sort(out.begin(), out.end(), [](const Offset& a, const Offset& b) {
            return std::tie(a.dist2, a.dy, a.dx) < std::tie(b.dist2, b.dy, b.dx);
        });
        return out;
    }();
    return offsets;
}

long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

void splat_region(const Image& image, const Mask& mask0, const RigidTransform& transform,
                  const std::optional<ColorTransform>& appearance, Image& frame, Mask& moved) {
    const std::size_t h = image.dim(1), w = image.dim(2);
    const auto [cx, cy] = mask_centroid(mask0);
    const bool pure_translation = transform.rotation == 0.0 && transform.log_scale == 0.0;
    const double s = transform.scale();
    const double cs = std::cos(transform.rotation) * s;
    const double sn = std::sin(transform.rotation) * s;

    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (!mask0[y * w + x]) continue;
            double qx, qy;
            if (pure_translation) {
                qx = static_cast<double>(x) + transform.dx;
                qy = static_cast<double>(y) + transform.dy;
            } else {
                const double px = static_cast<double>(x) - cx;
                const double py = static_cast<double>(y) - cy;
                qx = cx + cs * px - sn * py + transform.dx;
                qy = cy + sn * px + cs * py + transform.dy;
            }
            const long ix = round_half_up(qx);
            const long iy = round_half_up(qy);
            if (ix < 0 || iy < 0 || ix >= static_cast<long>(w) || iy >= static_cast<long>(h)) continue;
            const std::size_t dst = static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix);
            std::array<float, 3> rgb{image[0 * h * w + y * w + x], image[1 * h * w + y * w + x],
                                     image[2 * h * w + y * w + x]};
            if (appearance) rgb = appearance->apply(rgb);
            for (std::size_t c = 0; c < 3; ++c) frame[c * h * w + dst] = rgb[c];
            moved[dst] = 1;
        }
    }
}

}  // namespace

std::array<double, 2> mask_centroid(const Mask& mask) {
    const std::size_t h = mask.dim(0), w = mask.dim(1);
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            if (mask[y * w + x]) {
                sx += static_cast<double>(x);
                sy += static_cast<double>(y);
                ++n;
            }
    if (n == 0) throw ValidationError("MotionSpec.mask_nonempty", "mask has no pixels");
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

WarpResult forward_warp(const Image& image, const Mask& mask0, const RigidTransform& transform,
                        const std::optional<ColorTransform>& appearance) {
    if (mask0.rank() != 2 || image.dim(1) != mask0.dim(0) || image.dim(2) != mask0.dim(1)) {
        throw ValidationError("MotionSpec.mask_matches_image", "mask shape differs from image");
    }
    WarpResult r{image, make_mask(mask0.dim(0), mask0.dim(1)), make_mask(mask0.dim(0), mask0.dim(1))};
    splat_region(image, mask0, transform, appearance, r.frame, r.moved);
    for (std::size_t i = 0; i < mask0.size(); ++i) r.holes[i] = (mask0[i] && !r.moved[i]) ? 1 : 0;
    r.region_out_of_frame = count_nonzero(r.moved) == 0;
    return r;
}

Image nn_inpaint(const Image& frame, const Mask& holes, const Mask* exclude) {
    const std::size_t h = frame.dim(1), w = frame.dim(2);
    if (holes.dim(0) != h || holes.dim(1) != w) {
        throw ValidationError("inpaint.mask_shape", "hole mask differs from frame");
    }
    const auto is_donor = [&](std::size_t i) { return !holes[i] && !(exclude && (*exclude)[i]); };

    Image out = frame;
    if (count_nonzero(holes) == 0) return out;

    std::vector<std::size_t> donors;
    for (std::size_t i = 0; i < h * w; ++i)
        if (is_donor(i)) donors.push_back(i);
    if (donors.empty()) throw RuntimeError("nn_inpaint: every pixel is a hole");

    const auto& offsets = sorted_offsets();
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            if (!holes[i]) continue;
            std::size_t best = std::numeric_limits<std::size_t>::max();
            for (const Offset& o : offsets) {
                const long ny = static_cast<long>(y) + o.dy;
                const long nx = static_cast<long>(x) + o.dx;
                if (ny < 0 || nx < 0 || ny >= static_cast<long>(h) || nx >= static_cast<long>(w)) continue;
                const std::size_t j = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
                if (is_donor(j)) {
                    best = j;
                    break;
                }
            }
            if (best == std::numeric_limits<std::size_t>::max()) {
                // Nothing within the precomputed disk, so every donor lies farther
                // out: exhaustive search. Donors are row-major, so strict < keeps
                // the first among ties.
                long best_d2 = std::numeric_limits<long>::max();
                for (std::size_t j : donors) {
                    const long dy = static_cast<long>(j / w) - static_cast<long>(y);
                    const long dx = static_cast<long>(j % w) - static_cast<long>(x);
                    const long d2 = dy * dy + dx * dx;
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = j;
                    }
                }
            }
            for (std::size_t c = 0; c < 3; ++c) out[c * h * w + i] = frame[c * h * w + best];
        }
    }
    return out;
}

WarpedReference build_warped_reference(const Image& image, const MotionSpec& spec) {
    validate_source_image(image);
    const std::size_t h = image.dim(1), w = image.dim(2);
    validate(spec, h, w);

    const auto frames = static_cast<std::size_t>(spec.frame_count);
    std::vector<std::vector<FrameTransform>> per_region;
    per_region.reserve(spec.regions.size());
    for (const auto& region : spec.regions) {
        per_region.push_back(rasterize_trajectory(region, spec.frame_count));
    }

    WarpedReference ref{Video({frames, 3, h, w}), MaskVideo({frames, h, w}), {}};
    for (std::size_t f = 0; f < frames; ++f) {
        Image frame = image;
        Mask moved = make_mask(h, w);
        Mask vacated = make_mask(h, w);
        bool all_out = true;
        for (std::size_t r = 0; r < spec.regions.size(); ++r) {
            const auto& region = spec.regions[r];
            const auto& ft = per_region[r][f];
            Mask region_moved = make_mask(h, w);
            splat_region(image, region.mask, ft.transform, ft.appearance, frame, region_moved);
            all_out &= count_nonzero(region_moved) == 0;
            for (std::size_t i = 0; i < h * w; ++i) {
                moved[i] |= region_moved[i];
                vacated[i] |= region.mask[i];
            }
        }
        Mask holes = make_mask(h, w);
        for (std::size_t i = 0; i < h * w; ++i) holes[i] = (vacated[i] && !moved[i]) ? 1 : 0;
        if (all_out) {
            ref.warnings.push_back("frame " + std::to_string(f) + ": region moved out of frame");
        }
        set_video_frame(ref.frames, f, nn_inpaint(frame, holes, &moved));
        set_mask_frame(ref.mask, f, moved);
    }
    return ref;
}

}  // namespace ttm::motion
