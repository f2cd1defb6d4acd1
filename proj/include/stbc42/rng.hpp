#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stbc42 {

/// splitmix64 finalizer; used both as a seed scrambler and to derive
/// independent per-frame streams from (master_seed, snr_index, frame_index).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(mix64(master) ^ a) ^ b);
}

/// Seedable generator handle.  All stochastic operations in the library
/// take one of these explicitly, so every experiment is reproducible and
/// results do not depend on worker count when streams are derived with
/// derive_stream().
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) by modulo; n is tiny here, so the bias
    /// (< n / 2^64) is far below anything observable.
    std::uint32_t uniform_int(std::uint32_t n) {
        return static_cast<std::uint32_t>(eng_() % n);
    }

    /// Standard normal via the Marsaglia polar transform.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace stbc42
