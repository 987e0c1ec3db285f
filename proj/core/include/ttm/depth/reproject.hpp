#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "ttm/common/tensor.hpp"
#include "ttm/motion/warp.hpp"

namespace ttm::depth {

struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
};

/// Sign conventions bridging the pose source and this renderer. `point_signs`
/// flips camera-frame axes of back-projected points (and is undone before
/// projection); `flip_pitch` negates the pitch angle of every pose rotation.
struct AxisConvention {
    std::array<int, 3> point_signs{1, 1, 1};
    bool flip_pitch = false;
};

struct DepthMap {
    FloatTensor depth;  // (H, W), metric, strictly positive
    Intrinsics intrinsics;
    AxisConvention axes;
};

/// Camera-to-first-camera rigid pose.
struct CameraPose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct CameraPath {
    std::vector<CameraPose> poses;
    double scale = 1.0;  // multiplier on translations
};

struct PointCloud {
    std::vector<Eigen::Vector3d> positions;
    std::vector<std::array<float, 3>> colors;
    std::vector<std::size_t> source_pixels;  // row-major index into the source image
    std::size_t height = 0;
    std::size_t width = 0;
};

struct SplatResult {
    Image frame;    // (3, H, W); zeros where invalid
    Mask validity;  // 1 where at least one point landed
    /// Winning source pixel per destination pixel, or npos where invalid.
    std::vector<std::size_t> source_index;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

void validate(const DepthMap& depth, std::size_t height, std::size_t width);
void validate(const CameraPath& path);

/// Pinhole back-projection of every pixel: ((u - cx) d / fx, (v - cy) d / fy, d),
/// with the axis convention's point signs applied.
PointCloud backproject(const Image& image, const DepthMap& depth);

/// Renders the cloud from `pose` (translation pre-multiplied by `translation_scale`)
/// with nearest-pixel splats and a z-buffer. Equal depths resolve to the lower
/// source pixel index so the result does not depend on point order.
SplatResult splat_view(const PointCloud& cloud, const CameraPose& pose, const Intrinsics& intrinsics,
                       const AxisConvention& axes = {}, double translation_scale = 1.0);

/// Morphological opening (erode then dilate) with a k x k square. Erosion
/// treats out-of-bounds as valid and dilation as invalid, so a full mask is
/// preserved.
Mask clean_mask(const Mask& validity, int kernel = 5);
Mask erode(const Mask& mask, int kernel);
Mask dilate(const Mask& mask, int kernel);

/// Renders every pose of `path` at translation scale `scale`.
std::vector<SplatResult> render_path(const PointCloud& cloud, const DepthMap& depth,
                                     const CameraPath& path, double scale);

/// Mean squared error between rendered frames and `reference` over valid
/// pixels only; returns +inf when no pixel is valid.
double masked_video_mse(const std::vector<SplatResult>& renders, const Video& reference);

struct ScaleSearch {
    double lo = 0.01;
    double hi = 10.0;
    int iterations = 30;
};

/// Searches the translation scale minimizing masked MSE between the rendered
/// path and `reference` (F, 3, H, W). Interval-shrinking search on a unimodal
/// objective; ties keep the lower part of the interval, so a flat objective
/// returns `lo`.
double calibrate_scale(const Image& image, const DepthMap& depth, const CameraPath& path,
                       const Video& reference, const ScaleSearch& search = {});

struct CameraReferenceOptions {
    int open_kernel = 5;
    double min_valid_fraction = 0.2;
};

/// Camera-motion warped reference: per pose render, clean the validity mask,
/// inpaint invalid pixels from valid ones. The guidance mask is the cleaned
/// validity mask; a warning is recorded when the last frame is mostly invalid.
motion::WarpedReference build_camera_reference(const Image& image, const DepthMap& depth,
                                               const CameraPath& path,
                                               const CameraReferenceOptions& options = {});

/// True when `estimated_scale` passes the minimal-camera-motion filter.
bool passes_scale_filter(double estimated_scale, double threshold = 0.3);

/// Pitch (rotation about camera x) negated, yaw and roll kept, using the
/// decomposition R = Ry(yaw) Rx(pitch) Rz(roll).
Eigen::Matrix3d flip_pitch(const Eigen::Matrix3d& rotation);

/// Camera path JSON: {"version":1, "intrinsics":{fx,fy,cx,cy}, "scale":s,
/// "axes":{"point_signs":[..], "flip_pitch":b}, "poses":[[16 row-major]...]}.
struct CameraPathDocument {
    CameraPath path;
    Intrinsics intrinsics;
    AxisConvention axes;
};
nlohmann::json to_json(const CameraPathDocument& doc);
CameraPathDocument camera_path_from_json(const nlohmann::json& doc);
CameraPathDocument read_camera_path(const std::filesystem::path& path);

}  // namespace ttm::depth
