#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stbc42/constellation.hpp"
#include "stbc42/linalg.hpp"

namespace stbc42 {

inline constexpr double kDefaultTheta = 0.7853981633974483; // pi/4
inline double default_theta_g() { return ciod_angle(); }

/// Eight information symbols drawn from the unrotated constellation A_q,
/// with their indices into it.
struct SymbolVector {
    std::array<cdouble, 8> x{};
    std::array<std::uint8_t, 8> idx{};
};

/// Coordinate-interleaved orthogonal design for 4 antennas.  Block-diagonal:
/// the upper 2x2 block carries (s1I, s2I, s3Q, s4Q), the lower block the
/// complementary coordinates, so each block is an Alamouti-type matrix over
/// mixed coordinates of two symbols.
inline ComplexMat ciod4(const std::array<cdouble, 4>& s) {
    const double s1i = s[0].real(), s1q = s[0].imag();
    const double s2i = s[1].real(), s2q = s[1].imag();
    const double s3i = s[2].real(), s3q = s[2].imag();
    const double s4i = s[3].real(), s4q = s[3].imag();
    ComplexMat x(4, 4);
    x(0, 0) = cdouble(s1i, s3q);
    x(0, 1) = cdouble(-s2i, s4q);
    x(1, 0) = cdouble(s2i, s4q);
    x(1, 1) = cdouble(s1i, -s3q);
    x(2, 2) = cdouble(s3i, s1q);
    x(2, 3) = cdouble(-s4i, s2q);
    x(3, 2) = cdouble(s4i, s2q);
    x(3, 3) = cdouble(s3i, -s1q);
    return x;
}

/// Permutation that moves the second design's diagonal blocks onto the
/// anti-diagonal, making the stacked code full-rate.  Involution: P*P = I.
inline ComplexMat permutation_p() {
    ComplexMat p(4, 4);
    p(0, 2) = 1.0;
    p(1, 3) = 1.0;
    p(2, 0) = 1.0;
    p(3, 1) = 1.0;
    return p;
}

/// Codeword matrix S = X(s1..s4) + e^{j theta} X(s5..s8) P with
/// s_i = e^{j theta_g} x_i.  The two summands have disjoint support
/// (diagonal vs anti-diagonal 2x2 blocks).
inline ComplexMat encode(const std::array<cdouble, 8>& x, double theta_g,
                         double theta = kDefaultTheta) {
    const cdouble rot_g = std::polar(1.0, theta_g);
    std::array<cdouble, 4> lo, hi;
    for (int i = 0; i < 4; ++i) {
        lo[i] = rot_g * x[i];
        hi[i] = rot_g * x[i + 4];
    }
    ComplexMat s = ciod4(lo);
    const ComplexMat x2 = ciod4(hi);
    const cdouble rot = std::polar(1.0, theta);
    // Right-multiplying by P swaps column blocks {1,2} <-> {3,4}.
    for (std::size_t r = 0; r < 4; ++r) {
        s(r, 0) += rot * x2(r, 2);
        s(r, 1) += rot * x2(r, 3);
        s(r, 2) += rot * x2(r, 0);
        s(r, 3) += rot * x2(r, 1);
    }
    return s;
}

inline ComplexMat encode(const SymbolVector& xv, double theta_g,
                         double theta = kDefaultTheta) {
    return encode(xv.x, theta_g, theta);
}

/// A linear dispersion code: 2k weight matrices A_1..A_2k (n_t x T) such
/// that the codeword is sum_i xtilde_i A_i over the 2k real coordinates
/// [x1I, x1Q, ..., xkI, xkQ].
struct LinearDispersionCode {
    std::vector<ComplexMat> weights;
    std::size_t n_t = 4;
    std::size_t block_length = 4; // T
    std::size_t num_symbols = 8;  // k
    double theta_g = 0.0;
    double theta = kDefaultTheta;

    ComplexMat combine(const RealVec& x_tilde) const {
        ComplexMat s(n_t, block_length);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double c = x_tilde[i];
            if (c == 0.0) continue;
            for (std::size_t r = 0; r < n_t; ++r)
                for (std::size_t t = 0; t < block_length; ++t)
                    s(r, t) += c * weights[i](r, t);
        }
        return s;
    }
};

/// Real-coordinate interleave of a complex symbol vector.
template <std::size_t K>
inline RealVec interleave(const std::array<cdouble, K>& x) {
    RealVec v(2 * K);
    for (std::size_t i = 0; i < K; ++i) {
        v[2 * i] = x[i].real();
        v[2 * i + 1] = x[i].imag();
    }
    return v;
}

/// Weight matrices of the proposed code, built by exciting one real
/// coordinate of the encoder at a time.  A_1..A_8 come from the diagonal
/// design, A_9..A_16 carry the e^{j theta} factor.  Every ||A_i||_F^2 = 2.
inline LinearDispersionCode weight_matrices(double theta_g,
                                            double theta = kDefaultTheta) {
    LinearDispersionCode code;
    code.theta_g = theta_g;
    code.theta = theta;
    code.num_symbols = 8;
    code.weights.reserve(16);
    for (std::size_t i = 0; i < 16; ++i) {
        std::array<cdouble, 8> x{};
        x[i / 2] = (i % 2 == 0) ? cdouble(1.0, 0.0) : cdouble(0.0, 1.0);
        code.weights.push_back(encode(x, theta_g, theta));
    }
    return code;
}

/// The coordinate-interleaved design alone (k = 4, weights A_1..A_8),
/// used by the rotation-angle sweep.
inline LinearDispersionCode ciod4_code(double theta_g) {
    LinearDispersionCode code;
    code.theta_g = theta_g;
    code.theta = 0.0;
    code.num_symbols = 4;
    code.weights.reserve(8);
    const cdouble rot_g = std::polar(1.0, theta_g);
    for (std::size_t i = 0; i < 8; ++i) {
        std::array<cdouble, 4> s{};
        s[i / 2] = rot_g * ((i % 2 == 0) ? cdouble(1.0, 0.0) : cdouble(0.0, 1.0));
        code.weights.push_back(ciod4(s));
    }
    return code;
}

/// Generator matrix over the unrotated coordinates: column i = vec_real(A_i),
/// so vec_real(S) = G * xtilde for every symbol vector.
inline RealMat generator_matrix(const LinearDispersionCode& code) {
    const std::size_t rows = 2 * code.n_t * code.block_length;
    RealMat g(rows, code.weights.size());
    for (std::size_t i = 0; i < code.weights.size(); ++i) {
        const RealVec col = vec_real(code.weights[i]);
        for (std::size_t r = 0; r < rows; ++r) g(r, i) = col[r];
    }
    return g;
}

/// Block-diagonal stack of eight copies of J(theta_g); maps the unrotated
/// coordinate vector to the rotated one: stilde = F * xtilde.
inline RealMat f_matrix(double theta_g) {
    const RealMat j = RotationMatrix{theta_g}.matrix();
    RealMat f(16, 16);
    for (std::size_t b = 0; b < 8; ++b)
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c) f(2 * b + r, 2 * b + c) = j(r, c);
    return f;
}

/// k complex symbols over T channel uses.
inline double code_rate(std::size_t num_symbols, std::size_t block_length) {
    return static_cast<double>(num_symbols) / static_cast<double>(block_length);
}

inline double code_rate(const LinearDispersionCode& code) {
    return code_rate(code.num_symbols, code.block_length);
}

} // namespace stbc42
