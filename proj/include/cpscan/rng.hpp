#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace cpscan {

/// Fixed stream tags for seed derivation, so every campaign draws from a
/// documented, reproducible position in the seed tree.
namespace seed_tag {
inline constexpr std::uint64_t intensity = 0xA1;
inline constexpr std::uint64_t sequence = 0xA2;
inline constexpr std::uint64_t calibrate = 0xB1;
inline constexpr std::uint64_t walk = 0xD1;
inline constexpr std::uint64_t walk_side_neg = 0xD2;
inline constexpr std::uint64_t jump_draw = 0xD3;
inline constexpr std::uint64_t table1 = 0xC1;
inline constexpr std::uint64_t table2 = 0xC2;
} // namespace seed_tag

/** Finalizer of the splitmix64 generator; bijective on 64-bit words. */
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * Derive a child seed from a root seed and an ordered path of integers
 * (e.g. {tag, replicate, sequence}).  Different paths give statistically
 * independent streams; the same path always gives the same stream.
 */
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix64(seed ^ 0x7c15f39b9e37da4bULL);
    for (std::uint64_t part : path)
        s = mix64(s ^ mix64(part + 0x632be59bd9b4e019ULL));
    return s;
}

/**
 * Small deterministic RNG (splitmix64).  One instance per simulation task;
 * never shared across threads.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform01_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (two uniforms per draw, no caching,
    /// so the draw count per call is fixed and streams stay reproducible).
    double normal() noexcept {
        const double u = uniform01_pos();
        const double v = uniform01();
        return std::sqrt(-2.0 * std::log(u)) *
               std::cos(2.0 * std::numbers::pi * v);
    }

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    /// Uniform integer in [0, n).  Rejection-free modulo is fine here: n is
    /// tiny compared to 2^64 in every use, bias < 1e-15.
    std::uint64_t below(std::uint64_t n) noexcept { return next_u64() % n; }

  private:
    std::uint64_t state_;
};

} // namespace cpscan
