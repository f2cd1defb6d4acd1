#pragma once

#include <cmath>

#include "stbc42/linalg.hpp"
#include "stbc42/rng.hpp"

namespace stbc42 {

inline constexpr std::size_t kTxAntennas = 4;
inline constexpr std::size_t kRxAntennas = 2;
inline constexpr std::size_t kBlockLength = 4;

/// Quasi-static Rayleigh flat-fading realization: one H per codeword,
/// redrawn independently across codewords.
struct ChannelRealization {
    ComplexMat h; // 2x4
};

struct NoiseParams {
    double n0 = 1.0; // per-complex-entry noise variance
};

/// Entries (g1 + j*g2)/sqrt(2), unit total variance per complex entry.
/// Draw order is row-major, real part before imaginary part.
inline ChannelRealization sample_channel(Rng& rng) {
    ComplexMat h(kRxAntennas, kTxAntennas);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t r = 0; r < kRxAntennas; ++r)
        for (std::size_t c = 0; c < kTxAntennas; ++c) {
            const double re = rng.gaussian();
            const double im = rng.gaussian();
            h(r, c) = cdouble(re * inv_sqrt2, im * inv_sqrt2);
        }
    return ChannelRealization{h};
}

/// Complex white Gaussian noise, per-entry variance N0 (N0/2 per part).
/// N0 = 0 is allowed as a degenerate noiseless mode.
inline ComplexMat sample_noise(Rng& rng, const NoiseParams& np) {
    ComplexMat n(kRxAntennas, kBlockLength);
    const double sigma = std::sqrt(np.n0 / 2.0);
    for (std::size_t r = 0; r < kRxAntennas; ++r)
        for (std::size_t c = 0; c < kBlockLength; ++c) {
            const double re = rng.gaussian();
            const double im = rng.gaussian();
            n(r, c) = cdouble(re * sigma, im * sigma);
        }
    return n;
}

/// Y = H*S + N.
inline ComplexMat transmit(const ChannelRealization& ch, const ComplexMat& s,
                           const ComplexMat& n) {
    return ch.h * s + n;
}

/// SNR is average received signal power over average noise power at the
/// receiver array: E||HS||_F^2 / E||N||_F^2 = 32 / (8*N0) = 4/N0 for a
/// unit-average-energy constellation, so N0 = 4 / 10^(snr_db/10).
inline NoiseParams n0_for_snr(double snr_db) {
    return NoiseParams{4.0 / std::pow(10.0, snr_db / 10.0)};
}

} // namespace stbc42
