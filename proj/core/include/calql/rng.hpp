#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "calql/common.hpp"

namespace calql {

/// Deterministic random stream. Wraps std::mt19937_64 (whose raw output is
/// pinned by the standard) and supplies hand-rolled transformations so that
/// sampled values are bit-identical across platforms and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_index(std::uint64_t n) {
        require(n > 0, ErrorKind::InvalidArgument, "uniform_index: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    int uniform_int(int n) { return static_cast<int>(uniform_index(static_cast<std::uint64_t>(n))); }

    /// Standard normal via Box-Muller. The spare value is discarded so each
    /// call consumes a fixed amount of engine state.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Sample an index from an unnormalized weight vector by inverse-CDF scan.
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        require(total > 0.0, ErrorKind::InvalidArgument, "categorical: weights sum to zero");
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    std::mt19937_64 engine_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}
}  // namespace detail

/// Derive an independent named stream from a root seed. Changing one stream's
/// consumption pattern (e.g. eval cadence) never perturbs the others.
inline Rng named_stream(std::uint64_t root_seed, std::string_view name) {
    return Rng(detail::splitmix64(root_seed ^ detail::fnv1a64(name)));
}

/// Derive a sub-seed (for child tasks that construct their own streams).
inline std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0) {
    return detail::splitmix64(root_seed ^ detail::fnv1a64(name) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

}  // namespace calql
