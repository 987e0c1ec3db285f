#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ttm {

/// Seeded generator threaded through every stochastic operation. Copyable so a
/// caller can fork a stream; identical seeds give bitwise-identical draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Independent stream derived from (seed, stream) via seed_seq mixing.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        std::mt19937_64 e(seq);
        return Rng(e());
    }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    std::uint64_t next() { return engine_(); }

    void fill_normal(std::span<float> out) {
        for (float& x : out) x = static_cast<float>(normal_(engine_));
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace ttm
