#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "test_support.hpp"
#include "ttm/diffusion/denoiser.hpp"
#include "ttm/diffusion/noising.hpp"
#include "ttm/diffusion/schedule.hpp"
#include "ttm/diffusion/toy_denoiser.hpp"

using namespace ttm;
using namespace ttm::diffusion;

namespace {

struct Moments {
    double mean = 0, var = 0;
    std::size_t n = 0;
};

Moments moments(std::span<const float> v) {
    Moments m;
    m.n = v.size();
    for (float x : v) m.mean += x;
    m.mean /= double(m.n);
    for (float x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= double(m.n - 1);
    return m;
}

// Standard errors of the sample mean and variance of a Gaussian.
double se_mean(double var, std::size_t n) { return std::sqrt(var / double(n)); }
double se_var(double var, std::size_t n) { return var * std::sqrt(2.0 / double(n - 1)); }

}  // namespace

TEST(Schedule, EndpointsAndMonotonicity) {
    for (auto kind : {ScheduleKind::Linear, ScheduleKind::Cosine}) {
        const auto s = make_schedule(kind, 50);
        EXPECT_EQ(s.alpha_bar(0), 1.0);
        EXPECT_GT(s.alpha_bar(50), 0.0);
        for (int t = 1; t <= 50; ++t) {
            EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
            EXPECT_GT(s.beta(t), 0.0);
            EXPECT_LT(s.beta(t), 1.0);
        }
    }
}

TEST(Schedule, CosineMatchesClosedFormAtMidpoint) {
    const auto s = make_schedule(ScheduleKind::Cosine, 50);
    const auto f = [](double t) {
        const double c = std::cos((t / 50.0 + 0.008) / 1.008 * std::numbers::pi / 2.0);
        return c * c;
    };
    EXPECT_NEAR(s.alpha_bar(25), f(25) / f(0), 1e-12);
    EXPECT_NEAR(s.alpha_bar(36), f(36) / f(0), 1e-12);
}

TEST(Schedule, RejectsTooFewSteps) {
    EXPECT_THROW(make_schedule(ScheduleKind::Cosine, 1), ValidationError);
}

TEST(Schedule, JsonRoundTripPreservesHash) {
    const auto s = make_schedule(ScheduleKind::Linear, 30);
    const auto back = schedule_from_json(to_json(s));
    EXPECT_EQ(back.hash(), s.hash());
    EXPECT_NE(make_schedule(ScheduleKind::Cosine, 30).hash(), s.hash());
}

TEST(ForwardNoise, TimeZeroIsIdentity) {
    Rng rng(1);
    Video x({2, 3, 4, 4});
    rng.fill_normal(x.values());
    Rng r2(5);
    EXPECT_EQ(forward_noise(x, 0, make_schedule(), r2).values, x);
}

TEST(ForwardNoise, DeterministicForSeed) {
    const auto s = make_schedule();
    Video x({1, 3, 8, 8}, 0.25f);
    Rng a(9), b(9);
    EXPECT_EQ(forward_noise(x, 17, s, a).values, forward_noise(x, 17, s, b).values);
}

TEST(ForwardNoise, MarginalVarianceMatchesSchedule) {
    const auto s = make_schedule();
    const Video x0({1, 1, 1, 100000}, 0.0f);
    for (int t : {1, 25, 50}) {
        Rng rng(100 + t);
        const auto m = moments(forward_noise(x0, t, s, rng).values.values());
        const double var = 1.0 - s.alpha_bar(t);
        EXPECT_NEAR(m.var, var, 3 * se_var(var, m.n)) << "t=" << t;
        EXPECT_NEAR(m.mean, 0.0, 3 * se_mean(var, m.n)) << "t=" << t;
    }
}

TEST(ForwardNoise, TwoStepCompositionMatchesDirectMarginal) {
    const auto s = make_schedule();
    const int t = 30, mid = 12;
    const Video x0({1, 1, 1, 100000}, 0.7f);
    Rng rng(77);
    const Video xs = forward_noise(x0, mid, s, rng).values;
    Video eps(xs.shape());
    rng.fill_normal(eps.values());
    const double ratio = s.alpha_bar(t) / s.alpha_bar(mid);
    Video xt(xs.shape());
    for (std::size_t i = 0; i < xt.size(); ++i)
        xt[i] = float(std::sqrt(ratio) * xs[i] + std::sqrt(1 - ratio) * eps[i]);
    const auto m = moments(xt.values());
    const double mean = std::sqrt(s.alpha_bar(t)) * 0.7, var = 1 - s.alpha_bar(t);
    EXPECT_NEAR(m.mean, mean, 3 * se_mean(var, m.n));
    EXPECT_NEAR(m.var, var, 3 * se_var(var, m.n));
}

TEST(DdpmStep, LastStepWithZeroPredictionIsAffine) {
    const auto s = make_schedule();
    Rng rng(2);
    VideoState st{Video({1, 3, 4, 4}), 1};
    rng.fill_normal(st.values.values());
    const auto next = ddpm_step(st, Video(st.values.shape(), 0.0f), s, rng);
    EXPECT_EQ(next.t, 0);
    for (std::size_t i = 0; i < st.values.size(); ++i)
        EXPECT_NEAR(next.values[i], st.values[i] / std::sqrt(s.alpha(1)), 1e-6);
}

TEST(DdpmStep, RejectsTimeZero) {
    const auto s = make_schedule();
    Rng rng(2);
    VideoState st{Video({1, 3, 2, 2}), 0};
    EXPECT_THROW(ddpm_step(st, st.values, s, rng), ValidationError);
}

TEST(DdpmStep, SeededChainIsReproducible) {
    const auto s = make_schedule();
    const AnalyticGaussianDenoiser den(s, 0.1, 0.5);
    const auto run = [&] {
        Rng rng(31);
        VideoState x{Video({1, 3, 4, 4}), 50};
        rng.fill_normal(x.values.values());
        for (int t = 50; t >= 1; --t) x = ddpm_step(x, den.predict_noise(x, make_image(4, 4)), s, rng);
        return x.values;
    };
    EXPECT_EQ(run(), run());
}

TEST(AnalyticDenoiser, ZeroAtScaledMean) {
    const auto s = make_schedule();
    const AnalyticGaussianDenoiser den(s, 0.4, 0.3);
    VideoState x{Video({1, 3, 2, 2}, float(std::sqrt(s.alpha_bar(20)) * 0.4)), 20};
    const Video eps = den.predict_noise(x, make_image(2, 2));
    for (float e : eps.values()) EXPECT_NEAR(e, 0.0f, 1e-7);
}

TEST(AnalyticDenoiser, PointMassLimit) {
    const auto s = make_schedule();
    const AnalyticGaussianDenoiser den(s, -0.2, 1e-12);
    VideoState x{Video({1, 1, 1, 3}), 10};
    x.values[0] = 0.5f;
    x.values[1] = -1.0f;
    x.values[2] = 2.0f;
    const auto eps = den.predict_noise(x, make_image(1, 3));
    const double a = std::sqrt(s.alpha_bar(10)), sg = std::sqrt(1 - s.alpha_bar(10));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(eps[i], (x.values[i] - a * -0.2) / sg, 1e-5);
}

TEST(AnalyticDenoiser, MatchesGaussianConditioningAtMidSchedule) {
    const auto s = make_schedule();
    const double mean = 0.3, var = 0.45;
    const AnalyticGaussianDenoiser den(s, mean, var);
    const int t = 25;
    const double a = std::sqrt(s.alpha_bar(t)), sg = std::sqrt(1 - s.alpha_bar(t));
    // Joint Gaussian of (eps, x_t) with x_t = a x0 + sg eps; condition on x_t.
    Eigen::Matrix2d A;
    A << 0, 1, a, sg;  // rows: eps, x_t; columns: x0, eps
    Eigen::Matrix2d cov_in = Eigen::Vector2d(var, 1.0).asDiagonal();
    const Eigen::Matrix2d cov = A * cov_in * A.transpose();
    const Eigen::Vector2d mu = A * Eigen::Vector2d(mean, 0.0);
    Rng rng(4);
    VideoState x{Video({1, 1, 1, 64}), t};
    for (auto& v : x.values.values()) v = float(rng.uniform(-3, 3));
    const auto eps = den.predict_noise(x, make_image(1, 64));
    for (std::size_t i = 0; i < 64; ++i) {
        const double expect = mu(0) + cov(0, 1) / cov(1, 1) * (x.values[i] - mu(1));
        EXPECT_NEAR(eps[i], expect, 1e-5);
    }
}

namespace {

Moments reverse_chain_moments(const NoiseSchedule& s, double mean, double var, std::size_t n, std::uint64_t seed) {
    const AnalyticGaussianDenoiser den(s, mean, var);
    Rng rng(seed);
    VideoState x{Video({1, 1, 1, n}), s.steps()};
    rng.fill_normal(x.values.values());
    for (int t = s.steps(); t >= 1; --t) x = ddpm_step(x, den.predict_noise(x, make_image(1, 1)), s, rng);
    return moments(x.values.values());
}

// With a Gaussian prior every reverse step is affine in x_t plus Gaussian
// noise, so the output moments follow a scalar recursion.
Moments exact_chain_moments(const NoiseSchedule& s, double mean, double var) {
    double m = 0.0, v = 1.0;
    for (int t = s.steps(); t >= 1; --t) {
        const double ab = s.alpha_bar(t), sg2 = 1 - ab;
        const double gain = std::sqrt(sg2) / (ab * var + sg2);
        const double k = s.beta(t) / std::sqrt(sg2) * gain;
        const double a = (1 - k) / std::sqrt(s.alpha(t));
        const double b = k * std::sqrt(ab) * mean / std::sqrt(s.alpha(t));
        const double noise = t == 1 ? 0.0 : (1 - s.alpha_bar(t - 1)) / sg2 * s.beta(t);
        m = a * m + b;
        v = a * a * v + noise;
    }
    return {m, v, 0};
}

}  // namespace

TEST(AnalyticDenoiser, ReverseChainMatchesExactLinearGaussianMoments) {
    const auto s = make_schedule();
    const double mean = 0.3, var = 0.25;
    const auto exact = exact_chain_moments(s, mean, var);
    const auto m = reverse_chain_moments(s, mean, var, 10000, 12345);
    EXPECT_NEAR(m.mean, exact.mean, 3 * se_mean(exact.var, m.n));
    EXPECT_NEAR(m.var, exact.var, 3 * se_var(exact.var, m.n));
    // Fixed beta_tilde variance at T = 50 undershoots the data variance.
    EXPECT_LT(exact.var, 0.9 * var);
    EXPECT_NEAR(exact.mean, mean, 1e-6);
}

TEST(AnalyticDenoiser, FineScheduleReverseChainRecoversDataMoments) {
    const auto s = make_schedule(ScheduleKind::Cosine, 1000);
    const double mean = 0.3, var = 0.25;
    const auto m = reverse_chain_moments(s, mean, var, 10000, 777);
    EXPECT_NEAR(m.mean, mean, 3 * se_mean(var, m.n));
    EXPECT_NEAR(m.var, var, 3 * se_var(var, m.n));
}

TEST(ToyDenoiser, UntrainedOutputIsFiniteAndShaped) {
    const auto s = make_schedule();
    Rng rng(3);
    const ToyDenoiser den(s, SpaceTimeConvNet<float>({}, s.steps(), rng));
    VideoState x{Video({5, 3, 12, 10}), 33};
    rng.fill_normal(x.values.values());
    const auto eps = den.predict_noise(x, make_image(12, 10, 0.5f), "ignored");
    EXPECT_EQ(eps.shape(), x.values.shape());
    for (float v : eps.values()) ASSERT_TRUE(std::isfinite(v));
    EXPECT_EQ(eps, den.predict_noise(x, make_image(12, 10, 0.5f)));
}

TEST(ToyDenoiser, CheckpointRoundTripIsBitExact) {
    const auto s = make_schedule();
    Rng rng(3);
    ToyCheckpoint ckpt{s, SpaceTimeConvNet<float>({8, 3, 6.0f}, s.steps(), rng), {{"note", "probe"}}, {}};
    const auto back = ToyCheckpoint::decode(ckpt.encode());
    EXPECT_EQ(back.metadata, ckpt.metadata);
    EXPECT_EQ(back.schedule.hash(), s.hash());
    VideoState x{Video({4, 3, 8, 8}), 20};
    rng.fill_normal(x.values.values());
    const Image cond = make_image(8, 8, 0.1f);
    EXPECT_EQ(ToyDenoiser(back).predict_noise(x, cond), ToyDenoiser(ckpt).predict_noise(x, cond));
    EXPECT_EQ(ToyDenoiser(back).fingerprint(), ToyDenoiser(ckpt).fingerprint());
}

TEST(ToyDenoiser, CorruptCheckpointIsRejected) {
    const auto s = make_schedule();
    Rng rng(3);
    ToyCheckpoint ckpt{s, SpaceTimeConvNet<float>({8, 3, 6.0f}, s.steps(), rng), {}, {}};
    std::string bytes = ckpt.encode();
    EXPECT_ANY_THROW(ToyCheckpoint::decode(bytes.substr(0, bytes.size() / 2)));
    bytes[0] = 'X';
    EXPECT_ANY_THROW(ToyCheckpoint::decode(bytes));
}
