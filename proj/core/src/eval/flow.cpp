#include "ttm/eval/flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "ttm/common/error.hpp"
#include "ttm/common/tensor_file.hpp"

namespace ttm::eval {
namespace {

void check_video(const Video& v) {
    if (v.rank() != 4) throw ValidationError("Video.shape", "video must be (F, C, H, W)");
}

// Box sum over a (2h+1)^2 window clipped to the image; also returns the count.
void box_mean(const std::vector<double>& img, int H, int W, int h, std::vector<double>& out) {
    std::vector<double> integral(static_cast<std::size_t>((H + 1) * (W + 1)), 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            integral[static_cast<std::size_t>((y + 1) * (W + 1) + x + 1)] =
                img[static_cast<std::size_t>(y * W + x)] + integral[static_cast<std::size_t>(y * (W + 1) + x + 1)] +
                integral[static_cast<std::size_t>((y + 1) * (W + 1) + x)] -
                integral[static_cast<std::size_t>(y * (W + 1) + x)];
        }
    out.assign(static_cast<std::size_t>(H * W), 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const int y0 = std::max(0, y - h), y1 = std::min(H, y + h + 1);
            const int x0 = std::max(0, x - h), x1 = std::min(W, x + h + 1);
            const auto at = [&](int yy, int xx) { return integral[static_cast<std::size_t>(yy * (W + 1) + xx)]; };
            const double s = at(y1, x1) - at(y0, x1) - at(y1, x0) + at(y0, x0);
            out[static_cast<std::size_t>(y * W + x)] = s / ((y1 - y0) * (x1 - x0));
        }
}

std::map<std::string, FlowFactory>& registry() {
    static std::map<std::string, FlowFactory> r = {
        {"block_matching",
         [](const nlohmann::json& o) {
             return std::make_unique<BlockMatchingFlow>(o.value("radius", 4), o.value("half_patch", 1),
                                                        o.value("margin", 2e-3));
         }},
        {"ground_truth",
         [](const nlohmann::json& o) -> std::unique_ptr<FlowProvider> {
             if (!o.contains("path")) throw ValidationError("FlowProvider.options", "ground_truth needs a path");
             return std::make_unique<GroundTruthFlow>(read_float_tensor(o["path"].get<std::string>()));
         }},
    };
    return r;
}

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

BlockMatchingFlow::BlockMatchingFlow(int radius, int half_patch, double margin)
    : radius_(radius), half_(half_patch), margin_(margin) {
    if (radius < 1 || half_patch < 0 || margin < 0) {
        throw ValidationError("BlockMatchingFlow.params", "radius >= 1, half_patch >= 0, margin >= 0");
    }
}

FloatTensor BlockMatchingFlow::flow(const Video& video) const {
    check_video(video);
    const int F = static_cast<int>(video.dim(0)), C = static_cast<int>(video.dim(1));
    const int H = static_cast<int>(video.dim(2)), W = static_cast<int>(video.dim(3));
    FloatTensor out({static_cast<std::size_t>(std::max(0, F - 1)), 2, video.dim(2), video.dim(3)});
    const std::size_t hw = static_cast<std::size_t>(H * W);
    std::vector<double> diff(hw), cost, best(hw), zero_cost(hw);
    for (int f = 0; f + 1 < F; ++f) {
        std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
        float* fx = out.data() + static_cast<std::size_t>(f) * 2 * hw;
        float* fy = fx + hw;
        // Zero displacement first so it wins ties and sets the margin baseline.
        std::vector<std::array<int, 2>> offsets{{0, 0}};
        for (int dy = -radius_; dy <= radius_; ++dy)
            for (int dx = -radius_; dx <= radius_; ++dx)
                if (dx != 0 || dy != 0) offsets.push_back({dx, dy});
        std::stable_sort(offsets.begin() + 1, offsets.end(), [](const auto& a, const auto& b) {
            return a[0] * a[0] + a[1] * a[1] < b[0] * b[0] + b[1] * b[1];
        });
        for (const auto& [dx, dy] : offsets) {
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const int sx = std::clamp(x + dx, 0, W - 1), sy = std::clamp(y + dy, 0, H - 1);
                    double d = 0.0;
                    for (int c = 0; c < C; ++c) {
                        const double a = video.at({static_cast<std::size_t>(f), static_cast<std::size_t>(c),
                                                   static_cast<std::size_t>(y), static_cast<std::size_t>(x)});
                        const double b = video.at({static_cast<std::size_t>(f + 1), static_cast<std::size_t>(c),
                                                   static_cast<std::size_t>(sy), static_cast<std::size_t>(sx)});
                        d += (a - b) * (a - b);
                    }
                    diff[static_cast<std::size_t>(y * W + x)] = d / C;
                }
            box_mean(diff, H, W, half_, cost);
            const bool is_zero = dx == 0 && dy == 0;
            if (is_zero) zero_cost = cost;
            for (std::size_t i = 0; i < hw; ++i) {
                const double c = is_zero ? cost[i] : cost[i] + margin_;
                if (c < best[i] && (is_zero || cost[i] + margin_ < zero_cost[i])) {
                    best[i] = c;
                    fx[i] = static_cast<float>(dx);
                    fy[i] = static_cast<float>(dy);
                }
            }
        }
    }
    return out;
}

GroundTruthFlow::GroundTruthFlow(FloatTensor flow) : flow_(std::move(flow)) {
    if (flow_.rank() != 4 || flow_.dim(1) != 2) throw ValidationError("Flow.shape", "flow must be (F-1, 2, H, W)");
}

FloatTensor GroundTruthFlow::flow(const Video& video) const {
    check_video(video);
    if (flow_.dim(0) + 1 != video.dim(0) || flow_.dim(2) != video.dim(2) || flow_.dim(3) != video.dim(3)) {
        throw ValidationError("Flow.shape", "ground-truth flow " + shape_string(flow_.shape()) +
                                                " does not fit video " + shape_string(video.shape()));
    }
    return flow_;
}

void register_flow_provider(const std::string& name, FlowFactory factory) {
    std::lock_guard lock(registry_mutex());
    registry()[name] = std::move(factory);
}

std::unique_ptr<FlowProvider> make_flow_provider(const std::string& name, const nlohmann::json& options) {
    FlowFactory factory;
    {
        std::lock_guard lock(registry_mutex());
        const auto it = registry().find(name);
        if (it == registry().end()) throw ValidationError("FlowProvider.name", "unknown flow provider '" + name + "'");
        factory = it->second;
    }
    return factory(options);
}

std::vector<std::string> flow_provider_names() {
    std::lock_guard lock(registry_mutex());
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

DynamicDegree dynamic_degree_from_flow(const FloatTensor& flow, double alpha) {
    if (flow.rank() != 4 || flow.dim(1) != 2 || flow.dim(0) == 0) {
        throw ValidationError("Flow.shape", "flow must be (F-1, 2, H, W) with F >= 2");
    }
    const std::size_t frames = flow.dim(0), hw = flow.dim(2) * flow.dim(3);
    DynamicDegree out;
    out.threshold = alpha * static_cast<double>(std::min(flow.dim(2), flow.dim(3))) / 256.0;
    const std::size_t top = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(hw))));
    std::vector<double> mag(hw);
    std::size_t dynamic_frames = 0;
    for (std::size_t f = 0; f < frames; ++f) {
        const float* dx = flow.data() + f * 2 * hw;
        const float* dy = dx + hw;
        for (std::size_t i = 0; i < hw; ++i) mag[i] = std::hypot(double(dx[i]), double(dy[i]));
        std::nth_element(mag.begin(), mag.begin() + static_cast<long>(top - 1), mag.end(), std::greater<>());
        double sum = 0.0;
        for (std::size_t i = 0; i < top; ++i) sum += mag[i];
        const double mean = sum / static_cast<double>(top);
        out.frame_top_mean.push_back(mean);
        if (mean > out.threshold) ++dynamic_frames;
    }
    out.score = static_cast<double>(dynamic_frames) / static_cast<double>(frames);
    out.dynamic = out.score >= 0.25;
    return out;
}

DynamicDegree dynamic_degree(const Video& video, const FlowProvider& provider, double alpha) {
    const FloatTensor flow = provider.flow(video);
    if (flow.rank() != 4 || flow.dim(0) + 1 != video.dim(0) || flow.dim(2) != video.dim(2) ||
        flow.dim(3) != video.dim(3)) {
        throw ValidationError("Flow.shape", "provider returned flow of the wrong shape");
    }
    return dynamic_degree_from_flow(flow, alpha);
}

double ssim(const Video& a, const Video& b) {
    check_video(a);
    if (!a.same_shape(b)) throw ValidationError("camera_metrics.shape", "videos differ in shape");
    constexpr int kWin = 11, kHalf = 5;
    constexpr double kSigma = 1.5, C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    const int H = static_cast<int>(a.dim(2)), W = static_cast<int>(a.dim(3));
    if (H < kWin || W < kWin) throw ValidationError("ssim.size", "frames smaller than the 11x11 window");
    std::array<double, kWin> g{};
    double gs = 0.0;
    for (int i = 0; i < kWin; ++i) {
        g[static_cast<std::size_t>(i)] = std::exp(-(i - kHalf) * (i - kHalf) / (2 * kSigma * kSigma));
        gs += g[static_cast<std::size_t>(i)];
    }
    for (auto& v : g) v /= gs;

    const int oh = H - kWin + 1, ow = W - kWin + 1;
    // Separable valid-mode filtering of x, y, x^2, y^2, xy.
    const auto filter = [&](const std::vector<double>& img) {
        std::vector<double> tmp(static_cast<std::size_t>(H * ow)), out(static_cast<std::size_t>(oh * ow));
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int k = 0; k < kWin; ++k) s += g[static_cast<std::size_t>(k)] * img[static_cast<std::size_t>(y * W + x + k)];
                tmp[static_cast<std::size_t>(y * ow + x)] = s;
            }
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int k = 0; k < kWin; ++k) s += g[static_cast<std::size_t>(k)] * tmp[static_cast<std::size_t>((y + k) * ow + x)];
                out[static_cast<std::size_t>(y * ow + x)] = s;
            }
        return out;
    };

    const std::size_t planes = a.dim(0) * a.dim(1), hw = static_cast<std::size_t>(H * W);
    double total = 0.0;
    std::vector<double> x(hw), y(hw), xx(hw), yy(hw), xy(hw);
    for (std::size_t p = 0; p < planes; ++p) {
        for (std::size_t i = 0; i < hw; ++i) {
            x[i] = a[p * hw + i];
            y[i] = b[p * hw + i];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = filter(x), my = filter(y), sxx = filter(xx), syy = filter(yy), sxy = filter(xy);
        double sum = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = sxx[i] - mx[i] * mx[i], vy = syy[i] - my[i] * my[i], cxy = sxy[i] - mx[i] * my[i];
            sum += ((2 * mx[i] * my[i] + C1) * (2 * cxy + C2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + C1) * (vx + vy + C2));
        }
        total += sum / static_cast<double>(mx.size());
    }
    return total / static_cast<double>(planes);
}

CameraMetrics camera_metrics(const Video& generated, const Video& reference, const FlowProvider& provider) {
    check_video(generated);
    if (!generated.same_shape(reference)) throw ValidationError("camera_metrics.shape", "videos differ in shape");
    CameraMetrics m;
    double sq = 0.0;
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const double d = double(generated[i]) - reference[i];
        sq += d * d;
    }
    m.mse = sq / static_cast<double>(generated.size());
    m.ssim = ssim(generated, reference);
    const FloatTensor fa = provider.flow(generated), fb = provider.flow(reference);
    double fsq = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        const double d = double(fa[i]) - fb[i];
        fsq += d * d;
    }
    m.flow_mse = fa.size() ? fsq / static_cast<double>(fa.size()) : 0.0;
    return m;
}

}  // namespace ttm::eval
