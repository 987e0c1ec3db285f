#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "test_support.hpp"
#include "ttm/depth/reproject.hpp"

using namespace ttm;
using namespace ttm::depth;
using ttm::testing::box_mask;
using ttm::testing::random_image;

namespace {

DepthMap constant_depth(std::size_t h, std::size_t w, float d, Intrinsics k) {
    return {FloatTensor({h, w}, d), k, {}};
}

// Smooth texture so image error varies smoothly with camera offset.
Image smooth_image(std::size_t h, std::size_t w) {
    Image img = make_image(h, w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            img.at({0, y, x}) = 0.5f + 0.4f * std::sin(0.15f * x);
            img.at({1, y, x}) = 0.5f + 0.4f * std::cos(0.11f * y);
            img.at({2, y, x}) = 0.5f + 0.3f * std::sin(0.07f * (x + y));
        }
    return img;
}

CameraPath lateral_path(int frames, double step) {
    CameraPath p;
    for (int f = 0; f < frames; ++f) {
        CameraPose pose;
        pose.translation = Eigen::Vector3d(step * f, 0.0, 0.0);
        p.poses.push_back(pose);
    }
    return p;
}

// Brute-force opening with a square kernel; erosion treats out-of-bounds as set.
Mask brute_open(const Mask& m, int k) {
    const long h = long(m.dim(0)), w = long(m.dim(1)), r = k / 2;
    Mask e = m, o = make_mask(m.dim(0), m.dim(1));
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            std::uint8_t v = 1;
            for (long dy = -r; dy <= r; ++dy)
                for (long dx = -r; dx <= r; ++dx) {
                    const long yy = y + dy, xx = x + dx;
                    if (yy >= 0 && yy < h && xx >= 0 && xx < w) v &= m[yy * w + xx];
                }
            e[y * w + x] = v;
        }
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            std::uint8_t v = 0;
            for (long dy = -r; dy <= r; ++dy)
                for (long dx = -r; dx <= r; ++dx) {
                    const long yy = y + dy, xx = x + dx;
                    if (yy >= 0 && yy < h && xx >= 0 && xx < w) v |= e[yy * w + xx];
                }
            o[y * w + x] = v;
        }
    return o;
}

}  // namespace

TEST(Backproject, TwoByTwoHandComputed) {
    Image img = make_image(8, 8, 0.5f);
    DepthMap dm{FloatTensor({8, 8}, 1.0f), {2.0, 4.0, 0.5, 0.5}, {}};
    dm.depth.at({0, 0}) = 1.0f;
    dm.depth.at({0, 1}) = 2.0f;
    dm.depth.at({1, 0}) = 3.0f;
    dm.depth.at({1, 1}) = 4.0f;
    const auto cloud = backproject(img, dm);
    ASSERT_EQ(cloud.positions.size(), 64u);
    // (u - cx) d / fx, (v - cy) d / fy, d
    const Eigen::Vector3d expect[4] = {
        {-0.5 * 1 / 2.0, -0.5 * 1 / 4.0, 1}, {0.5 * 2 / 2.0, -0.5 * 2 / 4.0, 2},
        {-0.5 * 3 / 2.0, 0.5 * 3 / 4.0, 3},  {0.5 * 4 / 2.0, 0.5 * 4 / 4.0, 4}};
    const std::size_t idx[4] = {0, 1, 8, 9};
    for (int i = 0; i < 4; ++i) EXPECT_TRUE(cloud.positions[idx[i]].isApprox(expect[i], 1e-15)) << i;
}

TEST(Backproject, PrincipalPointMapsToOpticalAxis) {
    const auto cloud = backproject(make_image(9, 9, 0.3f), constant_depth(9, 9, 2.5f, {3, 3, 4, 4}));
    EXPECT_EQ(cloud.positions[4 * 9 + 4], Eigen::Vector3d(0, 0, 2.5));
}

TEST(Backproject, RejectsNonPositiveDepth) {
    DepthMap dm = constant_depth(8, 8, 1.0f, {4, 4, 4, 4});
    dm.depth[5] = 0.0f;
    EXPECT_THROW(backproject(make_image(8, 8), dm), ValidationError);
}

TEST(SplatView, IdentityPoseRoundTripIsExact) {
    Rng rng(3);
    const Image img = random_image(20, 24, rng);
    FloatTensor d({20, 24});
    for (auto& v : d.values()) v = static_cast<float>(rng.uniform(0.5, 8.0));
    const DepthMap dm{d, {30, 28, 11.5, 9.5}, {}};
    const auto r = splat_view(backproject(img, dm), {}, dm.intrinsics);
    EXPECT_EQ(r.frame, img);
    EXPECT_EQ(count_nonzero(r.validity), 20u * 24u);
}

TEST(SplatView, ZBufferKeepsNearestPoint) {
    PointCloud c;
    c.height = c.width = 4;
    c.positions = {{0, 0, 2}, {0, 0, 1}};
    c.colors = {{1, 0, 0}, {0, 1, 0}};
    c.source_pixels = {0, 1};
    const auto r = splat_view(c, {}, {1, 1, 1, 1});
    EXPECT_EQ(r.frame.at({1, 1, 1}), 1.0f);
    EXPECT_EQ(r.frame.at({0, 1, 1}), 0.0f);
}

TEST(SplatView, PointOrderDoesNotChangeRender) {
    Rng rng(4);
    const Image img = random_image(16, 16, rng);
    FloatTensor d({16, 16});
    for (auto& v : d.values()) v = static_cast<float>(rng.uniform_int(2, 4));
    const DepthMap dm{d, {12, 12, 7.5, 7.5}, {}};
    auto cloud = backproject(img, dm);
    CameraPose pose;
    pose.translation = {0.4, -0.2, 0.3};
    pose.rotation = Eigen::AngleAxisd(0.05, Eigen::Vector3d::UnitY()).toRotationMatrix();
    const auto ref = splat_view(cloud, pose, dm.intrinsics);

    std::vector<std::size_t> perm(cloud.positions.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    PointCloud shuffled = cloud;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        shuffled.positions[i] = cloud.positions[perm[i]];
        shuffled.colors[i] = cloud.colors[perm[i]];
        shuffled.source_pixels[i] = cloud.source_pixels[perm[i]];
    }
    const auto other = splat_view(shuffled, pose, dm.intrinsics);
    EXPECT_EQ(other.frame, ref.frame);
    EXPECT_EQ(other.validity, ref.validity);
}

TEST(SplatView, ForwardDollyOnPlaneMatchesMagnification) {
    const std::size_t n = 64;
    const double d = 10.0, tz = 2.0, c = 31.5;
    Rng rng(5);
    const Image img = random_image(n, n, rng);
    const DepthMap dm = constant_depth(n, n, float(d), {60, 60, c, c});
    CameraPose pose;
    pose.translation = {0, 0, tz};
    const auto r = splat_view(backproject(img, dm), pose, dm.intrinsics);
    const double mag = d / (d - tz);
    std::size_t valid = 0, within = 0;
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t u = 0; u < n; ++u) {
            const std::size_t s = r.source_index[v * n + u];
            if (s == SplatResult::npos) continue;
            ++valid;
            // Homography of the plane: centered uniform upscaling.
            const double pu = c + (double(s % n) - c) * mag, pv = c + (double(s / n) - c) * mag;
            within += std::abs(pu - double(u)) <= 0.5 && std::abs(pv - double(v)) <= 0.5;
        }
    ASSERT_GT(valid, n * n / 2);
    EXPECT_GE(double(within), 0.99 * double(valid));
}

TEST(SplatView, LateralMoveOnPlaneShiftsByFocalDisparity) {
    const std::size_t n = 48;
    const double d = 5.0, f = 40.0;
    Rng rng(6);
    const Image img = random_image(n, n, rng);
    const DepthMap dm = constant_depth(n, n, float(d), {f, f, 23.5, 23.5});
    const auto path = lateral_path(4, 0.25);  // shift f * 0.25 / d = 2 px per frame
    const auto renders = render_path(backproject(img, dm), dm, path, 1.0);
    for (std::size_t k = 0; k < renders.size(); ++k) {
        const long shift = long(2 * k);
        std::size_t valid = 0, match = 0;
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t u = 0; u < n; ++u) {
                if (!renders[k].validity.at({v, u})) continue;
                ++valid;
                const long su = long(u) + shift;
                match += su >= 0 && su < long(n) && renders[k].source_index[v * n + u] == v * n + std::size_t(su);
            }
        EXPECT_EQ(valid, n * (n - std::size_t(shift)));
        EXPECT_EQ(match, valid);
    }
}

TEST(CleanMask, FullMaskIsPreserved) {
    EXPECT_EQ(clean_mask(make_mask(12, 12, 1)), make_mask(12, 12, 1));
}

TEST(CleanMask, IsolatedSpeckIsRemoved) {
    Mask m = make_mask(12, 12);
    m.at({5, 5}) = 1;
    EXPECT_EQ(count_nonzero(clean_mask(m)), 0u);
}

TEST(CleanMask, SolidBlockMatchesBruteForceOpening) {
    const Mask block = box_mask(24, 24, 7, 5, 10, 10);
    EXPECT_EQ(clean_mask(block), brute_open(block, 5));
    EXPECT_EQ(clean_mask(block), block);
}

TEST(CleanMask, RandomMasksMatchBruteForceAndAreIdempotent) {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Mask m = make_mask(20, 20);
        for (auto& v : m.values()) v = rng.uniform() < 0.7;
        const Mask c = clean_mask(m);
        ASSERT_EQ(c, brute_open(m, 5));
        ASSERT_EQ(clean_mask(c), c);
    }
}

TEST(CalibrateScale, RecoversPlantedScale) {
    const std::size_t n = 48;
    const Image img = smooth_image(n, n);
    FloatTensor d({n, n});
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) d.at({y, x}) = 4.0f + 0.02f * float(x + y);
    const DepthMap dm{d, {40, 40, 23.5, 23.5}, {}};
    const auto path = lateral_path(5, 0.05);
    const auto renders = render_path(backproject(img, dm), dm, path, 1.7);
    Video reference({5, 3, n, n});
    for (std::size_t f = 0; f < 5; ++f) set_video_frame(reference, f, renders[f].frame);
    EXPECT_NEAR(calibrate_scale(img, dm, path, reference), 1.7, 0.02);
}

TEST(CalibrateScale, FlatObjectiveReturnsLowerBound) {
    const Image img = smooth_image(16, 16);
    const DepthMap dm = constant_depth(16, 16, 3.0f, {10, 10, 7.5, 7.5});
    const auto path = lateral_path(3, 0.0);
    const Video reference = repeat_frames(img, 3);
    EXPECT_EQ(calibrate_scale(img, dm, path, reference), 0.01);
}

TEST(CalibrateScale, MatchesDenseGridOnMonotoneObjective) {
    const std::size_t n = 32;
    const Image img = smooth_image(n, n);
    const DepthMap dm = constant_depth(n, n, 4.0f, {30, 30, 15.5, 15.5});
    const auto path = lateral_path(3, 0.05);
    const Video reference = repeat_frames(img, 3);  // error grows with any motion
    const auto cloud = backproject(img, dm);
    const double step = 0.01;
    double best = 0.01, best_mse = 1e300;
    for (double s = 0.01; s <= 10.0; s += step) {
        const double mse = masked_video_mse(render_path(cloud, dm, path, s), reference);
        if (mse < best_mse) {
            best_mse = mse;
            best = s;
        }
    }
    EXPECT_NEAR(calibrate_scale(img, dm, path, reference), best, step);
}

TEST(CalibrateScale, InvariantToBrightnessOffset) {
    const std::size_t n = 32;
    Image img = smooth_image(n, n);
    const DepthMap dm = constant_depth(n, n, 4.0f, {30, 30, 15.5, 15.5});
    const auto path = lateral_path(3, 0.05);
    const auto renders = render_path(backproject(img, dm), dm, path, 2.5);
    Video reference({3, 3, n, n});
    for (std::size_t f = 0; f < 3; ++f) set_video_frame(reference, f, renders[f].frame);
    const double base = calibrate_scale(img, dm, path, reference);
    Image brighter = img;
    for (auto& v : brighter.values()) v = std::min(1.0f, v + 0.05f);
    Video ref_b = reference;
    for (auto& v : ref_b.values()) v = std::min(1.0f, v + 0.05f);
    EXPECT_NEAR(calibrate_scale(brighter, dm, path, ref_b), base, 0.02);
}

TEST(CameraReference, StaticPathRepeatsSource) {
    Rng rng(8);
    const Image img = random_image(16, 16, rng);
    const DepthMap dm = constant_depth(16, 16, 2.0f, {10, 10, 7.5, 7.5});
    const auto ref = build_camera_reference(img, dm, lateral_path(4, 0.0));
    for (std::size_t f = 0; f < 4; ++f) EXPECT_EQ(video_frame(ref.frames, f), img);
    EXPECT_EQ(count_nonzero(ref.mask), 4u * 16u * 16u);
    EXPECT_TRUE(ref.warnings.empty());
}

TEST(CameraReference, LargeMotionWarnsButSucceeds) {
    Rng rng(9);
    const Image img = random_image(16, 16, rng);
    const DepthMap dm = constant_depth(16, 16, 2.0f, {10, 10, 7.5, 7.5});
    const auto ref = build_camera_reference(img, dm, lateral_path(3, 2.5));
    EXPECT_FALSE(ref.warnings.empty());
    EXPECT_EQ(ref.frame_count(), 3u);
}

TEST(CameraPath, RejectsNonIdentityFirstPoseAndSkewRotation) {
    CameraPath p = lateral_path(2, 0.1);
    p.poses[0].translation.x() = 1.0;
    EXPECT_THROW(validate(p), ValidationError);
    p = lateral_path(2, 0.1);
    p.poses[1].rotation(0, 1) = 0.3;
    EXPECT_THROW(validate(p), ValidationError);
}

TEST(CameraPath, JsonRoundTrip) {
    CameraPathDocument doc;
    doc.intrinsics = {50, 52, 31.5, 30.5};
    doc.axes.point_signs = {1, -1, -1};
    doc.axes.flip_pitch = true;
    doc.path = lateral_path(3, 0.2);
    doc.path.poses[2].rotation = Eigen::AngleAxisd(0.1, Eigen::Vector3d::UnitY()).toRotationMatrix();
    doc.path.scale = 1.5;
    const auto back = camera_path_from_json(to_json(doc));
    EXPECT_EQ(back.path.poses.size(), 3u);
    EXPECT_TRUE(back.path.poses[2].rotation.isApprox(doc.path.poses[2].rotation, 0));
    EXPECT_EQ(back.axes.point_signs, doc.axes.point_signs);
    EXPECT_EQ(back.path.scale, 1.5);
}

TEST(FlipPitch, NegatesPitchOnly) {
    using Eigen::AngleAxisd;
    using Eigen::Vector3d;
    const double yaw = 0.3, pitch = 0.2, roll = -0.1;
    const Eigen::Matrix3d r = (AngleAxisd(yaw, Vector3d::UnitY()) * AngleAxisd(pitch, Vector3d::UnitX()) *
                               AngleAxisd(roll, Vector3d::UnitZ())).toRotationMatrix();
    const Eigen::Matrix3d e = (AngleAxisd(yaw, Vector3d::UnitY()) * AngleAxisd(-pitch, Vector3d::UnitX()) *
                               AngleAxisd(roll, Vector3d::UnitZ())).toRotationMatrix();
    EXPECT_TRUE(flip_pitch(r).isApprox(e, 1e-12));
}

TEST(ScaleFilter, DefaultThreshold) {
    EXPECT_FALSE(passes_scale_filter(0.29));
    EXPECT_TRUE(passes_scale_filter(0.3));
}
