#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace scbris {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based stream: output i is mix64(key + (i + 1) * golden_gamma).
///
/// Trivially portable; the exact bit stream is part of the reproducibility
/// contract documented in docs/reproducibility.md.
class RandomStream {
public:
    static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

    explicit constexpr RandomStream(std::uint64_t key) noexcept : state_(key) {}

    constexpr std::uint64_t next_u64() noexcept {
        state_ += golden_gamma;
        return mix64(state_);
    }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform_open0() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Circularly-symmetric complex Gaussian, unit variance.
    /// |z|^2 = -ln(u1) is exactly Exp(1); the phase is 2*pi*u2.
    std::complex<double> complex_normal() noexcept {
        const double radius = std::sqrt(-std::log(uniform_open0()));
        const double phase = 2.0 * std::numbers::pi * uniform();
        return {radius * std::cos(phase), radius * std::sin(phase)};
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

/// Per-trial stream key: a fixed hash of (master_seed, trial_index).
constexpr std::uint64_t trial_stream_key(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
    return mix64(mix64(master_seed) + trial_index * 0xD1B54A32D192ED03ULL);
}

inline RandomStream trial_stream(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
    return RandomStream(trial_stream_key(master_seed, trial_index));
}

}  // namespace scbris
