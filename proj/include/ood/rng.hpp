#pragma once

// Deterministic seeded randomness. Every draw is a pure function of a 64-bit
// seed, so work items (rows, trials, sweep cells) can run on any number of
// threads in any order without changing a single bit of output.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace ood::rng {

// splitmix64 finalizer; full-period 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

// Seed-derivation scheme used everywhere a sub-stream is split off a parent
// seed: combine(s, a) != combine(s, b) for a != b, and chains
// combine(combine(master, kind), cell) stay decorrelated.
inline std::uint64_t combine(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed ^ (value + 0x9E3779B97F4A7C15ull + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t combine(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return combine(combine(seed, a), b);
}

inline std::uint64_t combine(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c) {
    return combine(combine(seed, a, b), c);
}

// splitmix64 sequence generator.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; never zero, safe as a log argument.
    double next_double_open_low() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    // Unbiased integer in [0, n) via rejection.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0ull - n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t x = next();
            if (x >= threshold) return x % n;
        }
    }

private:
    std::uint64_t state_;
};

// Stream of standard normals (Box-Muller over SplitMix64 uniforms). The
// algorithm is fixed here rather than taken from <random> so that streams are
// reproducible across standard libraries.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : u_(seed) {}

    double next_uniform() { return u_.next_double(); }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = u_.next_double_open_low();
        const double u2 = u_.next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    SplitMix64 u_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// First k entries of a seeded Fisher-Yates shuffle of `pool`, in draw order.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k,
                                          SplitMix64& gen) {
    for (std::size_t i = 0; i < k && i + 1 < pool.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(gen.next_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

} // namespace ood::rng
