#pragma once

#include <cmath>
#include <cstdint>

namespace qfuse {

/**
 * SplitMix64 — the fixed per-stream generator for every simulation in this
 * project.
 *
 * Streams are derived, not advanced: a trial stream is seeded with
 * stream_seed(seed, lane, index), so any subset of trials can run in any
 * order (or in parallel) and still produce bit-identical results. The
 * algorithm and its constants are part of the output contract; golden
 * files depend on them.
 */
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [a, b).
    double uniform(double a, double b) {
        return a + uniform01() * (b - a);
    }

    /// Standard normal via Box-Muller (cosine branch only, so one draw
    /// consumes exactly two uniforms; keeps streams countable).
    double gaussian() {
        // u1 in (0, 1] so log() is finite
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    double gaussian(double mean, double stddev) {
        return mean + stddev * gaussian();
    }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // multiply-shift; bias is < 2^-64 per draw, irrelevant at our n
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<uint64_t>(m >> 64);
    }

private:
    uint64_t state_;
};

/// One SplitMix64 scramble round, used to mix stream keys.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive the seed of an independent substream. lane separates logical
/// users of the same master seed (per method, per sensor count), index
/// separates trials within a lane.
inline uint64_t stream_seed(uint64_t seed, uint64_t lane, uint64_t index) {
    return mix64(mix64(mix64(seed) ^ lane) ^ index);
}

} // namespace qfuse
