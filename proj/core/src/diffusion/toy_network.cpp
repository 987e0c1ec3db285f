#include "ttm/diffusion/toy_network.hpp"

#include <algorithm>
#include <cmath>

namespace ttm::diffusion {

namespace {

template <typename Scalar>
Scalar sigmoid(Scalar z) {
    return Scalar(1) / (Scalar(1) + std::exp(-z));
}

}  // namespace

namespace {

// Columns for voxels [begin, begin + count) written contiguously to dst.
template <typename Scalar>
void gather_columns(const Scalar* src, int channels, int frames, int height, int width, std::size_t begin,
                    std::size_t count, Scalar* dst) {
    const std::size_t block = static_cast<std::size_t>(channels);
    const std::size_t hw = static_cast<std::size_t>(height) * width;
    for (std::size_t n = begin; n < begin + count; ++n) {
        const int f = static_cast<int>(n / hw);
        const int y = static_cast<int>((n % hw) / width);
        const int x = static_cast<int>(n % width);
        for (int dz = -1; dz <= 1; ++dz) {
            const int sf = f + dz;
            for (int dy = -1; dy <= 1; ++dy) {
                const int sy = y + dy;
                for (int dx = -1; dx <= 1; ++dx, dst += block) {
                    const int sx = x + dx;
                    if (sf < 0 || sf >= frames || sy < 0 || sy >= height || sx < 0 || sx >= width) {
                        std::fill(dst, dst + block, Scalar(0));
                        continue;
                    }
                    const std::size_t m = (static_cast<std::size_t>(sf) * height + sy) * width + sx;
                    std::copy(src + m * block, src + (m + 1) * block, dst);
                }
            }
        }
    }
}

}  // namespace

template <typename Scalar>
void im2col3d(const typename SpaceTimeConvNet<Scalar>::Matrix& input, int frames, int height, int width,
              typename SpaceTimeConvNet<Scalar>::Matrix& columns) {
    const int channels = static_cast<int>(input.rows());
    const Eigen::Index n = static_cast<Eigen::Index>(frames) * height * width;
    columns.resize(static_cast<Eigen::Index>(channels) * 27, n);
    gather_columns(input.data(), channels, frames, height, width, 0, static_cast<std::size_t>(n), columns.data());
}

template <typename Scalar>
void col2im3d(const typename SpaceTimeConvNet<Scalar>::Matrix& columns, int channels, int frames,
              int height, int width, typename SpaceTimeConvNet<Scalar>::Matrix& output) {
    const Eigen::Index n = static_cast<Eigen::Index>(frames) * height * width;
    output.setZero(channels, n);
    Scalar* dst = output.data();
    const Scalar* src = columns.data();
    const std::size_t block = static_cast<std::size_t>(channels);
    for (int f = 0; f < frames; ++f)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                for (int dz = -1; dz <= 1; ++dz) {
                    const int sf = f + dz;
                    for (int dy = -1; dy <= 1; ++dy) {
                        const int sy = y + dy;
                        for (int dx = -1; dx <= 1; ++dx, src += block) {
                            const int sx = x + dx;
                            if (sf < 0 || sf >= frames || sy < 0 || sy >= height || sx < 0 || sx >= width) continue;
                            Scalar* d = dst + ((static_cast<std::size_t>(sf) * height + sy) * width + sx) * block;
                            for (std::size_t c = 0; c < block; ++c) d[c] += src[c];
                        }
                    }
                }
            }
}

template <typename Scalar>
SpaceTimeConvNet<Scalar>::SpaceTimeConvNet(ToyNetConfig config, int steps)
    : config_(config), steps_(steps) {
    if (config_.depth < 2 || config_.hidden < 1) {
        throw ValidationError("ToyNetConfig.shape", "need depth >= 2 and hidden >= 1");
    }
    for (int l = 0; l < config_.depth; ++l) {
        Conv conv;
        conv.in = l == 0 ? kToyInputChannels : config_.hidden;
        conv.out = l + 1 == config_.depth ? kToyOutputChannels : config_.hidden;
        conv.weight = Matrix::Zero(conv.out, conv.in * 27);
        conv.bias = VectorX::Zero(conv.out);
        convs_.push_back(std::move(conv));
    }
    time_embedding_ = Matrix::Zero(steps_ + 1, config_.hidden);
}

template <typename Scalar>
SpaceTimeConvNet<Scalar>::SpaceTimeConvNet(ToyNetConfig config, int steps, Rng& rng)
    : SpaceTimeConvNet(config, steps) {
    for (std::size_t l = 0; l < convs_.size(); ++l) {
        auto& conv = convs_[l];
        const double fan_in = conv.in * 27.0;
        const bool last = l + 1 == convs_.size();
        const double std = (last ? 0.1 : 1.0) * std::sqrt((last ? 1.0 : 2.0) / fan_in);
        for (Eigen::Index i = 0; i < conv.weight.size(); ++i) {
            conv.weight.data()[i] = static_cast<Scalar>(std * rng.normal());
        }
    }
}

template <typename Scalar>
auto SpaceTimeConvNet<Scalar>::forward(const Matrix& features, int frames, int height, int width, int t,
                                       Activations* cache) const -> Matrix {
    if (features.rows() != kToyInputChannels ||
        features.cols() != static_cast<Eigen::Index>(frames) * height * width) {
        throw ValidationError("ToyNet.features_shape", "feature matrix shape mismatch");
    }
    if (t < 0 || t > steps_) throw ValidationError("ToyNet.timestep", "timestep outside [0, T]");

    if (!cache) return forward_chunked(features, frames, height, width, t);

    Activations& a = *cache;
    a.frames = frames;
    a.height = height;
    a.width = width;
    a.columns.resize(convs_.size());
    a.pre.resize(convs_.size() - 1);
    a.residual = features.middleRows(6, 3);

    Matrix x = features;
    for (std::size_t l = 0; l < convs_.size(); ++l) {
        const Conv& conv = convs_[l];
        Matrix& col = a.columns[l];
        im2col3d<Scalar>(x, frames, height, width, col);
        Matrix z = conv.weight * col;
        VectorX shift = conv.bias;
        if (l == 0) shift += time_embedding_.row(t).transpose();
        z.colwise() += shift;
        if (l + 1 == convs_.size()) {
            z += a.residual;
            return z;
        }
        x.resize(z.rows(), z.cols());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            const Scalar v = z.data()[i];
            x.data()[i] = v * sigmoid(v);
        }
        a.pre[l] = std::move(z);
    }
    return {};  // unreachable: depth >= 2
}

template <typename Scalar>
auto SpaceTimeConvNet<Scalar>::forward_chunked(const Matrix& features, int frames, int height, int width,
                                               int t) const -> Matrix {
    // Inference path: gather columns per block of voxels so the working set
    // stays in cache instead of materializing every im2col matrix.
    constexpr std::size_t kChunk = 1024;
    const std::size_t n = static_cast<std::size_t>(features.cols());
    Matrix x = features, next;
    Matrix col;
    for (std::size_t l = 0; l < convs_.size(); ++l) {
        const Conv& conv = convs_[l];
        const bool last = l + 1 == convs_.size();
        VectorX shift = conv.bias;
        if (l == 0) shift += time_embedding_.row(t).transpose();
        next.resize(conv.out, static_cast<Eigen::Index>(n));
        for (std::size_t begin = 0; begin < n; begin += kChunk) {
            const std::size_t count = std::min(kChunk, n - begin);
            col.resize(static_cast<Eigen::Index>(conv.in) * 27, static_cast<Eigen::Index>(count));
            gather_columns(x.data(), conv.in, frames, height, width, begin, count, col.data());
            auto z = next.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
            z.noalias() = conv.weight * col;
            z.colwise() += shift;
            if (last) {
                z += features.middleRows(6, 3).middleCols(static_cast<Eigen::Index>(begin),
                                                          static_cast<Eigen::Index>(count));
            } else {
                for (Eigen::Index j = 0; j < z.cols(); ++j)
                    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = z(i, j) * sigmoid(z(i, j));
            }
        }
        std::swap(x, next);
    }
    return x;
}

template <typename Scalar>
void SpaceTimeConvNet<Scalar>::backward(const Activations& cache, const Matrix& d_output, int t,
                                        Gradients& grads) const {
    Matrix g = d_output;
    for (std::size_t li = convs_.size(); li-- > 0;) {
        const Conv& conv = convs_[li];
        grads.weight[li].noalias() += g * cache.columns[li].transpose();
        const VectorX row_sums = g.rowwise().sum();
        grads.bias[li] += row_sums;
        if (li == 0) {
            grads.time_embedding.row(t) += row_sums.transpose();
            break;
        }
        const Matrix d_col = conv.weight.transpose() * g;
        Matrix d_x;
        col2im3d<Scalar>(d_col, conv.in, cache.frames, cache.height, cache.width, d_x);
        const Matrix& pre = cache.pre[li - 1];
        for (Eigen::Index i = 0; i < d_x.size(); ++i) {
            const Scalar z = pre.data()[i];
            const Scalar s = sigmoid(z);
            d_x.data()[i] *= s * (Scalar(1) + z * (Scalar(1) - s));
        }
        g = std::move(d_x);
    }
}

template <typename Scalar>
auto SpaceTimeConvNet<Scalar>::zero_gradients() const -> Gradients {
    Gradients g;
    for (const auto& conv : convs_) {
        g.weight.push_back(Matrix::Zero(conv.weight.rows(), conv.weight.cols()));
        g.bias.push_back(VectorX::Zero(conv.bias.size()));
    }
    g.time_embedding = Matrix::Zero(time_embedding_.rows(), time_embedding_.cols());
    return g;
}

template <typename Scalar>
std::size_t SpaceTimeConvNet<Scalar>::parameter_count() const {
    std::size_t n = static_cast<std::size_t>(time_embedding_.size());
    for (const auto& conv : convs_) n += static_cast<std::size_t>(conv.weight.size() + conv.bias.size());
    return n;
}

template <typename Scalar>
std::vector<Scalar*> SpaceTimeConvNet<Scalar>::parameter_blocks(std::vector<std::size_t>& sizes) {
    std::vector<Scalar*> blocks;
    sizes.clear();
    for (auto& conv : convs_) {
        blocks.push_back(conv.weight.data());
        sizes.push_back(static_cast<std::size_t>(conv.weight.size()));
        blocks.push_back(conv.bias.data());
        sizes.push_back(static_cast<std::size_t>(conv.bias.size()));
    }
    blocks.push_back(time_embedding_.data());
    sizes.push_back(static_cast<std::size_t>(time_embedding_.size()));
    return blocks;
}

template <typename Scalar>
std::vector<const Scalar*> SpaceTimeConvNet<Scalar>::parameter_blocks(std::vector<std::size_t>& sizes) const {
    auto blocks = const_cast<SpaceTimeConvNet*>(this)->parameter_blocks(sizes);
    return {blocks.begin(), blocks.end()};
}

template <typename Scalar>
std::vector<Scalar*> SpaceTimeConvNet<Scalar>::gradient_blocks(Gradients& g, std::vector<std::size_t>& sizes) {
    std::vector<Scalar*> blocks;
    sizes.clear();
    for (std::size_t l = 0; l < g.weight.size(); ++l) {
        blocks.push_back(g.weight[l].data());
        sizes.push_back(static_cast<std::size_t>(g.weight[l].size()));
        blocks.push_back(g.bias[l].data());
        sizes.push_back(static_cast<std::size_t>(g.bias[l].size()));
    }
    blocks.push_back(g.time_embedding.data());
    sizes.push_back(static_cast<std::size_t>(g.time_embedding.size()));
    return blocks;
}

template <typename Scalar>
typename SpaceTimeConvNet<Scalar>::Matrix make_toy_features(const Video& state, const Image& condition,
                                                            int t, const NoiseSchedule& schedule,
                                                            float feature_clamp) {
    if (state.rank() != 4 || state.dim(1) != 3) {
        throw ValidationError("ToyNet.state_shape", "state must be (F, 3, H, W)");
    }
    const std::size_t frames = state.dim(0), h = state.dim(2), w = state.dim(3);
    if (condition.rank() != 3 || condition.dim(0) != 3 || condition.dim(1) != h || condition.dim(2) != w) {
        throw ValidationError("ToyNet.condition_shape", "condition image must be (3, H, W) of the state");
    }
    const std::size_t hw = h * w, n = frames * hw;
    const double ab = schedule.alpha_bar(t);
    const double a = std::sqrt(ab);
    const double sigma = std::sqrt(1.0 - ab);
    const double inv_sigma = sigma > 0 ? 1.0 / sigma : 0.0;

    typename SpaceTimeConvNet<Scalar>::Matrix feats(kToyInputChannels, static_cast<Eigen::Index>(n));
    Scalar* out = feats.data();
    for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t i = 0; i < hw; ++i) {
            Scalar* v = out + (f * hw + i) * kToyInputChannels;
            for (std::size_t c = 0; c < 3; ++c) {
                const float x = state.data()[(f * 3 + c) * hw + i];
                const float cond = condition.data()[c * hw + i];
                const double r = (static_cast<double>(x) - a * cond) * inv_sigma;
                v[c] = static_cast<Scalar>(x);
                v[3 + c] = static_cast<Scalar>(cond);
                v[6 + c] = static_cast<Scalar>(std::clamp(r, -static_cast<double>(feature_clamp),
                                                          static_cast<double>(feature_clamp)));
            }
            v[9] = static_cast<Scalar>(sigma);
        }
    return feats;
}

template class SpaceTimeConvNet<float>;
template class SpaceTimeConvNet<double>;
template void im2col3d<float>(const SpaceTimeConvNet<float>::Matrix&, int, int, int,
                              SpaceTimeConvNet<float>::Matrix&);
template void im2col3d<double>(const SpaceTimeConvNet<double>::Matrix&, int, int, int,
                               SpaceTimeConvNet<double>::Matrix&);
template void col2im3d<float>(const SpaceTimeConvNet<float>::Matrix&, int, int, int, int,
                              SpaceTimeConvNet<float>::Matrix&);
template void col2im3d<double>(const SpaceTimeConvNet<double>::Matrix&, int, int, int, int,
                               SpaceTimeConvNet<double>::Matrix&);
template SpaceTimeConvNet<float>::Matrix make_toy_features<float>(const Video&, const Image&, int,
                                                                 const NoiseSchedule&, float);
template SpaceTimeConvNet<double>::Matrix make_toy_features<double>(const Video&, const Image&, int,
                                                                   const NoiseSchedule&, float);

}  // namespace ttm::diffusion
