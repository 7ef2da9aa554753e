#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace ssgcn {

/// Stream identifiers. Every consumer of randomness derives its own generator
/// from (seed, stream) so that adding a draw in one place never shifts the
/// sequence seen by another.
enum class Stream : std::uint64_t {
    sampling = 1,
    test_pool = 2,
    validation = 3,
    init = 4,
    synthetic = 5,
    shuffle = 6,
    root = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seedable, splittable generator: std::mt19937_64 keyed by
/// splitmix64(seed) ^ splitmix64(splitmix64(stream)). Bounded integers, reals
/// and normals are derived here (not via <random> distributions, whose
/// algorithms are implementation-defined) so sequences are identical across
/// standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(splitmix64(seed) ^ splitmix64(splitmix64(stream))) {}
    Rng(std::uint64_t seed, Stream stream) : Rng(seed, static_cast<std::uint64_t>(stream)) {}

    /// Child generator for a sub-stream (e.g. one per trial).
    Rng split(std::uint64_t child) { return Rng(next(), child); }

    std::uint64_t next() { return engine_(); }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next(); }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
    std::uint64_t uniform_index(std::uint64_t bound) {
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = next();
                m = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one value per call).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Index drawn with probability weights[i] / sum(weights). Falls back to a
    /// uniform choice when every weight is zero. weights must be non-empty.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) return static_cast<std::size_t>(uniform_index(weights.size()));
        const double target = uniform() * total;
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            acc += weights[i];
            last_positive = i;
            if (target < acc) return i;
        }
        return last_positive;
    }

    /// Fisher-Yates shuffle driven by uniform_index.
    template <class RandomIt>
    void shuffle(RandomIt first, RandomIt last) {
        using std::swap;
        for (auto i = last - first; i > 1; --i)
            swap(first[i - 1], first[static_cast<std::ptrdiff_t>(uniform_index(static_cast<std::uint64_t>(i)))]);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace ssgcn
