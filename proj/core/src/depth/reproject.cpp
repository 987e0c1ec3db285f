#include "ttm/depth/reproject.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Geometry>

namespace ttm::depth {
namespace {

long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

Eigen::Vector3d apply_signs(const std::array<int, 3>& s, const Eigen::Vector3d& p) {
    return {s[0] * p.x(), s[1] * p.y(), s[2] * p.z()};
}

}  // namespace

void validate(const DepthMap& depth, std::size_t height, std::size_t width) {
    ViolationList v;
    v.check(depth.depth.rank() == 2 && depth.depth.dim(0) == height && depth.depth.dim(1) == width,
            "DepthMap.shape");
    v.check(std::all_of(depth.depth.values().begin(), depth.depth.values().end(),
                        [](float d) { return std::isfinite(d) && d > 0.0f; }),
            "DepthMap.positive_depth");
    const auto& k = depth.intrinsics;
    v.check(k.fx > 0 && k.fy > 0, "DepthMap.focal_positive");
    v.check(k.cx >= 0 && k.cx < static_cast<double>(width) && k.cy >= 0 &&
                k.cy < static_cast<double>(height),
            "DepthMap.principal_point_in_image");
    for (int s : depth.axes.point_signs) v.check(s == 1 || s == -1, "DepthMap.axis_signs");
    v.throw_if_any("depth map");
}

void validate(const CameraPath& path) {
    ViolationList v;
    v.check(!path.poses.empty(), "CameraPath.nonempty");
    v.check(std::isfinite(path.scale) && path.scale > 0, "CameraPath.scale_positive");
    if (!path.poses.empty()) {
        const auto& p0 = path.poses.front();
        v.check(p0.rotation.isIdentity(1e-12) && p0.translation.isZero(1e-12), "CameraPath.first_identity");
    }
    bool orthonormal = true, finite = true;
    for (const auto& p : path.poses) {
        finite &= p.rotation.allFinite() && p.translation.allFinite();
        orthonormal &= (p.rotation.transpose() * p.rotation - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff() <= 1e-6;
    }
    v.check(finite, "CameraPath.finite");
    v.check(orthonormal, "CameraPath.orthonormal");
    v.throw_if_any("camera path");
}

PointCloud backproject(const Image& image, const DepthMap& depth) {
    validate_source_image(image);
    const std::size_t h = image.dim(1), w = image.dim(2);
    validate(depth, h, w);
    const auto& k = depth.intrinsics;

    PointCloud cloud;
    cloud.height = h;
    cloud.width = w;
    cloud.positions.reserve(h * w);
    cloud.colors.reserve(h * w);
    cloud.source_pixels.reserve(h * w);
    for (std::size_t v = 0; v < h; ++v) {
        for (std::size_t u = 0; u < w; ++u) {
            const std::size_t i = v * w + u;
            const double d = depth.depth[i];
            const Eigen::Vector3d p((static_cast<double>(u) - k.cx) * d / k.fx,
                                    (static_cast<double>(v) - k.cy) * d / k.fy, d);
            cloud.positions.push_back(apply_signs(depth.axes.point_signs, p));
            cloud.colors.push_back({image[i], image[h * w + i], image[2 * h * w + i]});
            cloud.source_pixels.push_back(i);
        }
    }
    return cloud;
}

SplatResult splat_view(const PointCloud& cloud, const CameraPose& pose, const Intrinsics& k,
                       const AxisConvention& axes, double translation_scale) {
    const std::size_t h = cloud.height, w = cloud.width;
    SplatResult out{make_image(h, w), make_mask(h, w), std::vector<std::size_t>(h * w, SplatResult::npos)};
    std::vector<double> zbuf(h * w, std::numeric_limits<double>::infinity());

    const Eigen::Matrix3d rotation = axes.flip_pitch ? flip_pitch(pose.rotation) : pose.rotation;
    const Eigen::Matrix3d world_to_camera = rotation.transpose();
    const Eigen::Vector3d origin = translation_scale * pose.translation;

    for (std::size_t n = 0; n < cloud.positions.size(); ++n) {
        const Eigen::Vector3d q =
            apply_signs(axes.point_signs, world_to_camera * (cloud.positions[n] - origin));
        if (!(q.z() > 1e-9)) continue;
        const long u = round_half_up(k.fx * q.x() / q.z() + k.cx);
        const long v = round_half_up(k.fy * q.y() / q.z() + k.cy);
        if (u < 0 || v < 0 || u >= static_cast<long>(w) || v >= static_cast<long>(h)) continue;
        const std::size_t dst = static_cast<std::size_t>(v) * w + static_cast<std::size_t>(u);
        const std::size_t src = cloud.source_pixels[n];
        const bool nearer = q.z() < zbuf[dst];
        const bool tie_wins = q.z() == zbuf[dst] && src < out.source_index[dst];
        if (!nearer && !tie_wins) continue;
        zbuf[dst] = q.z();
        out.source_index[dst] = src;
        out.validity[dst] = 1;
        for (std::size_t c = 0; c < 3; ++c) out.frame[c * h * w + dst] = cloud.colors[n][c];
    }
    return out;
}

Mask erode(const Mask& mask, int kernel) {
    const long h = static_cast<long>(mask.dim(0)), w = static_cast<long>(mask.dim(1));
    const long r = kernel / 2;
    Mask rows = mask, out = mask;
    // Separable square structuring element; out-of-bounds counts as set.
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            std::uint8_t v = 1;
            for (long d = -r; d <= r && v; ++d) {
                const long xx = x + d;
                if (xx >= 0 && xx < w) v &= mask[y * w + xx];
            }
            rows[y * w + x] = v;
        }
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            std::uint8_t v = 1;
            for (long d = -r; d <= r && v; ++d) {
                const long yy = y + d;
                if (yy >= 0 && yy < h) v &= rows[yy * w + x];
            }
            out[y * w + x] = v;
        }
    return out;
}

Mask dilate(const Mask& mask, int kernel) {
    const long h = static_cast<long>(mask.dim(0)), w = static_cast<long>(mask.dim(1));
    const long r = kernel / 2;
    Mask rows = mask, out = mask;
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            std::uint8_t v = 0;
            for (long d = -r; d <= r && !v; ++d) {
                const long xx = x + d;
                if (xx >= 0 && xx < w) v |= mask[y * w + xx];
            }
            rows[y * w + x] = v;
        }
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            std::uint8_t v = 0;
            for (long d = -r; d <= r && !v; ++d) {
                const long yy = y + d;
                if (yy >= 0 && yy < h) v |= rows[yy * w + x];
            }
            out[y * w + x] = v;
        }
    return out;
}

Mask clean_mask(const Mask& validity, int kernel) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw ValidationError("clean_mask.kernel", "kernel size must be odd and positive");
    }
    return dilate(erode(validity, kernel), kernel);
}

std::vector<SplatResult> render_path(const PointCloud& cloud, const DepthMap& depth,
                                     const CameraPath& path, double scale) {
    std::vector<SplatResult> renders;
    renders.reserve(path.poses.size());
    for (const auto& pose : path.poses) {
        renders.push_back(splat_view(cloud, pose, depth.intrinsics, depth.axes, scale));
    }
    return renders;
}

double masked_video_mse(const std::vector<SplatResult>& renders, const Video& reference) {
    if (reference.rank() != 4 || reference.dim(0) != renders.size()) {
        throw ValidationError("calibrate_scale.reference_shape", "reference frame count differs from path");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < renders.size(); ++f) {
        const auto& r = renders[f];
        const std::size_t hw = r.validity.size();
        if (reference.dim(1) != 3 || reference.dim(2) * reference.dim(3) != hw) {
            throw ValidationError("calibrate_scale.reference_shape", "reference frame shape differs");
        }
        const float* ref = reference.data() + f * 3 * hw;
        for (std::size_t i = 0; i < hw; ++i) {
            if (!r.validity[i]) continue;
            for (std::size_t c = 0; c < 3; ++c) {
                const double d = static_cast<double>(r.frame[c * hw + i]) - ref[c * hw + i];
                sum += d * d;
            }
            count += 3;
        }
    }
    return count == 0 ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(count);
}

double calibrate_scale(const Image& image, const DepthMap& depth, const CameraPath& path,
                       const Video& reference, const ScaleSearch& search) {
    validate(path);
    const PointCloud cloud = backproject(image, depth);
    bool any_valid = false;
    const auto objective = [&](double s) {
        const double mse = masked_video_mse(render_path(cloud, depth, path, s), reference);
        any_valid |= std::isfinite(mse);
        return mse;
    };

    double lo = search.lo, hi = search.hi;
    for (int i = 0; i < search.iterations; ++i) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        const double f1 = objective(m1);
        const double f2 = objective(m2);
        if (f1 <= f2 || (!std::isfinite(f1) && !std::isfinite(f2))) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    const double mid = 0.5 * (lo + hi);
    const double f_lo = objective(lo);
    const double f_mid = objective(mid);
    if (!any_valid) throw RuntimeError("calibrate_scale: no valid pixels at any scale");
    return f_lo <= f_mid ? lo : mid;
}

motion::WarpedReference build_camera_reference(const Image& image, const DepthMap& depth,
                                               const CameraPath& path,
                                               const CameraReferenceOptions& options) {
    validate(path);
    const PointCloud cloud = backproject(image, depth);
    const std::size_t h = cloud.height, w = cloud.width, frames = path.poses.size();

    motion::WarpedReference ref{Video({frames, 3, h, w}), MaskVideo({frames, h, w}), {}};
    for (std::size_t f = 0; f < frames; ++f) {
        const SplatResult r =
            splat_view(cloud, path.poses[f], depth.intrinsics, depth.axes, path.scale);
        const Mask guidance = clean_mask(r.validity, options.open_kernel);
        Mask holes = make_mask(h, w);
        for (std::size_t i = 0; i < h * w; ++i) holes[i] = r.validity[i] ? 0 : 1;
        if (count_nonzero(r.validity) == 0) {
            ref.warnings.push_back("frame " + std::to_string(f) + ": no valid pixels");
            set_video_frame(ref.frames, f, r.frame);
        } else {
            set_video_frame(ref.frames, f, motion::nn_inpaint(r.frame, holes));
        }
        set_mask_frame(ref.mask, f, guidance);
    }
    if (frames > 0) {
        const double valid = static_cast<double>(count_nonzero(mask_frame(ref.mask, frames - 1))) /
                             static_cast<double>(h * w);
        if (valid < options.min_valid_fraction) {
            ref.warnings.push_back("last frame guidance coverage " + std::to_string(valid) +
                                   " below " + std::to_string(options.min_valid_fraction));
        }
    }
    return ref;
}

bool passes_scale_filter(double estimated_scale, double threshold) {
    return estimated_scale >= threshold;
}

Eigen::Matrix3d flip_pitch(const Eigen::Matrix3d& r) {
    const double pitch = std::asin(std::clamp(-r(1, 2), -1.0, 1.0));
    const double roll = std::atan2(r(1, 0), r(1, 1));
    const double yaw = std::atan2(r(0, 2), r(2, 2));
    using Eigen::AngleAxisd;
    using Eigen::Vector3d;
    return (AngleAxisd(yaw, Vector3d::UnitY()) * AngleAxisd(-pitch, Vector3d::UnitX()) *
            AngleAxisd(roll, Vector3d::UnitZ()))
        .toRotationMatrix();
}

nlohmann::json to_json(const CameraPathDocument& doc) {
    nlohmann::json poses = nlohmann::json::array();
    for (const auto& p : doc.path.poses) {
        std::vector<double> m(16, 0.0);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r * 4 + c] = p.rotation(r, c);
            m[r * 4 + 3] = p.translation(r);
        }
        m[15] = 1.0;
        poses.push_back(m);
    }
    const auto& k = doc.intrinsics;
    return {{"version", 1},
            {"intrinsics", {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}}},
            {"scale", doc.path.scale},
            {"axes", {{"point_signs", doc.axes.point_signs}, {"flip_pitch", doc.axes.flip_pitch}}},
            {"poses", std::move(poses)}};
}

CameraPathDocument camera_path_from_json(const nlohmann::json& j) {
    try {
        CameraPathDocument doc;
        const auto& k = j.at("intrinsics");
        doc.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                          k.at("cy").get<double>()};
        doc.path.scale = j.value("scale", 1.0);
        if (j.contains("axes")) {
            doc.axes.point_signs = j["axes"].value("point_signs", std::array<int, 3>{1, 1, 1});
            doc.axes.flip_pitch = j["axes"].value("flip_pitch", false);
        }
        for (const auto& pj : j.at("poses")) {
            const auto m = pj.get<std::vector<double>>();
            if (m.size() != 16) throw ValidationError("CameraPath.pose_shape", "pose must have 16 entries");
            CameraPose p;
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) p.rotation(r, c) = m[r * 4 + c];
                p.translation(r) = m[r * 4 + 3];
            }
            doc.path.poses.push_back(p);
        }
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("CameraPath.schema", e.what());
    }
}

CameraPathDocument read_camera_path(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("CameraPath.schema", e.what());
    }
    return camera_path_from_json(j);
}

}  // namespace ttm::depth
