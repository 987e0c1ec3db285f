#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ttm/common/random.hpp"
#include "ttm/common/tensor.hpp"
#include "ttm/diffusion/schedule.hpp"

namespace ttm::diffusion {

/// Shape of the toy eps-predictor.
///
/// Input features per voxel (channel-major):
///   [0, 3)  noisy state x_t
///   [3, 6)  condition image (first frame), broadcast over time
///   [6, 9)  clamp((x_t - sqrt(alpha_bar) * cond) / sigma, +-feature_clamp)
///   [9]     sigma = sqrt(1 - alpha_bar)
/// Body: conv3x3x3 -> +time embedding -> SiLU -> (conv3x3x3 -> SiLU) x (depth-2)
/// -> conv3x3x3, plus a skip from the residual feature [6, 9).
struct ToyNetConfig {
    int hidden = 16;
    int depth = 3;  // number of 3x3x3 convolutions, >= 2
    float feature_clamp = 6.0f;

    friend bool operator==(const ToyNetConfig&, const ToyNetConfig&) = default;
};

inline constexpr int kToyInputChannels = 10;
inline constexpr int kToyOutputChannels = 3;

template <typename Scalar>
class SpaceTimeConvNet {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    struct Conv {
        int in = 0;
        int out = 0;
        Matrix weight;  // (out, 27 * in), column k * in + c is offset k of channel c
        VectorX bias;   // (out)
    };

    /// Activations as (C, F*H*W) column-major matrices: the channels of one
    /// voxel are contiguous.
    struct Activations {
        int frames = 0, height = 0, width = 0;
        std::vector<Matrix> columns;    // im2col input of each conv
        std::vector<Matrix> pre;        // pre-activation of each hidden conv
        Matrix residual;                // skip feature (3, N)
    };

    struct Gradients {
        std::vector<Matrix> weight;
        std::vector<VectorX> bias;
        Matrix time_embedding;
    };

    SpaceTimeConvNet(ToyNetConfig config, int steps, Rng& rng);
    SpaceTimeConvNet(ToyNetConfig config, int steps);  // zero parameters

    const ToyNetConfig& config() const noexcept { return config_; }
    int steps() const noexcept { return steps_; }

    /// features: (kToyInputChannels, F*H*W). Returns (3, F*H*W).
    Matrix forward(const Matrix& features, int frames, int height, int width, int t,
                   Activations* cache = nullptr) const;

    /// Accumulates parameter gradients of sum(d_output .* output) into `grads`.
    void backward(const Activations& cache, const Matrix& d_output, int t, Gradients& grads) const;

    Gradients zero_gradients() const;

    /// Flat views for optimizers, checkpoints and gradient checks. Order:
    /// for each conv: weight then bias; then the time embedding.
    std::size_t parameter_count() const;
    std::vector<Scalar*> parameter_blocks(std::vector<std::size_t>& sizes);
    std::vector<const Scalar*> parameter_blocks(std::vector<std::size_t>& sizes) const;
    static std::vector<Scalar*> gradient_blocks(Gradients& g, std::vector<std::size_t>& sizes);

    std::vector<Conv>& convs() noexcept { return convs_; }
    const std::vector<Conv>& convs() const noexcept { return convs_; }
    Matrix& time_embedding() noexcept { return time_embedding_; }
    const Matrix& time_embedding() const noexcept { return time_embedding_; }

private:
    Matrix forward_chunked(const Matrix& features, int frames, int height, int width, int t) const;

    ToyNetConfig config_;
    int steps_;
    std::vector<Conv> convs_;
    Matrix time_embedding_;  // (steps + 1, hidden)
};

/// Builds the (kToyInputChannels, F*H*W) feature matrix from a (F, 3, H, W)
/// state, its (3, H, W) condition image and the schedule position.
template <typename Scalar>
typename SpaceTimeConvNet<Scalar>::Matrix make_toy_features(const Video& state, const Image& condition,
                                                            int t, const NoiseSchedule& schedule,
                                                            float feature_clamp);

/// Gathers 3x3x3 zero-padded neighborhoods: (C, F*H*W) -> (27*C, F*H*W),
/// offset-major within each column.
template <typename Scalar>
void im2col3d(const typename SpaceTimeConvNet<Scalar>::Matrix& input, int frames, int height, int width,
              typename SpaceTimeConvNet<Scalar>::Matrix& columns);

/// Adjoint of im2col3d.
template <typename Scalar>
void col2im3d(const typename SpaceTimeConvNet<Scalar>::Matrix& columns, int channels, int frames,
              int height, int width, typename SpaceTimeConvNet<Scalar>::Matrix& output);

extern template class SpaceTimeConvNet<float>;
extern template class SpaceTimeConvNet<double>;

}  // namespace ttm::diffusion
