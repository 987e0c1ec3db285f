#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttm/common/tensor.hpp"

namespace ttm::eval {

/// Dense forward flow of a (F, C, H, W) video as (F-1, 2, H, W): channel 0 is
/// dx, channel 1 is dy, from frame f to f+1.
class FlowProvider {
public:
    virtual ~FlowProvider() = default;
    virtual FloatTensor flow(const Video& video) const = 0;
    virtual std::string name() const = 0;
};

/// Integer block matching: for each pixel, the displacement within `radius`
/// minimizing the mean squared difference over a (2*half+1)^2 patch. A
/// nonzero displacement must beat zero by `margin` (per element MSE).
class BlockMatchingFlow final : public FlowProvider {
public:
    explicit BlockMatchingFlow(int radius = 4, int half_patch = 1, double margin = 2e-3);
    FloatTensor flow(const Video& video) const override;
    std::string name() const override { return "block_matching"; }

private:
    int radius_, half_;
    double margin_;
};

/// Returns a fixed flow tensor (e.g. closed-form flow from the toy world).
class GroundTruthFlow final : public FlowProvider {
public:
    explicit GroundTruthFlow(FloatTensor flow);
    FloatTensor flow(const Video& video) const override;
    std::string name() const override { return "ground_truth"; }

private:
    FloatTensor flow_;
};

using FlowFactory = std::function<std::unique_ptr<FlowProvider>(const nlohmann::json& options)>;

/// Named provider registry. Built in: "block_matching" (options radius,
/// half_patch, margin) and "ground_truth" (option path to a tensor file).
void register_flow_provider(const std::string& name, FlowFactory factory);
std::unique_ptr<FlowProvider> make_flow_provider(const std::string& name,
                                                 const nlohmann::json& options = nlohmann::json::object());
std::vector<std::string> flow_provider_names();

inline constexpr double kDynamicAlpha = 3.5;

struct DynamicDegree {
    bool dynamic = false;
    double score = 0.0;  // fraction of frames classified dynamic
    double threshold = 0.0;
    std::vector<double> frame_top_mean;  // mean of the top 5% magnitudes per flow frame
};

/// A frame is dynamic when the mean of its top 5% flow magnitudes exceeds
/// alpha * min(H, W) / 256; the clip is dynamic when at least 25% of frames are.
DynamicDegree dynamic_degree_from_flow(const FloatTensor& flow, double alpha = kDynamicAlpha);
DynamicDegree dynamic_degree(const Video& video, const FlowProvider& provider, double alpha = kDynamicAlpha);

struct CameraMetrics {
    double mse = 0.0;
    double ssim = 1.0;
    double flow_mse = 0.0;
};

/// SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03 and
/// data range 1, averaged over valid window positions, channels and frames.
double ssim(const Video& a, const Video& b);
CameraMetrics camera_metrics(const Video& generated, const Video& reference, const FlowProvider& provider);

}  // namespace ttm::eval
