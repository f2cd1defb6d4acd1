#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stbc42/channel.hpp"
#include "stbc42/code.hpp"
#include "stbc42/constellation.hpp"
#include "stbc42/decoder.hpp"
#include "stbc42/rng.hpp"
#include "test_util.hpp"

using namespace stbc42;

TEST_CASE("channel entries have unit power and zero mean") {
    Rng rng(31);
    const std::size_t draws = 125'000; // x8 entries = 1e6 samples
    double power = 0.0;
    cdouble mean{};
    for (std::size_t t = 0; t < draws; ++t) {
        const ChannelRealization ch = sample_channel(rng);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 4; ++c) {
                power += std::norm(ch.h(r, c));
                mean += ch.h(r, c);
            }
    }
    power /= double(draws * 8);
    mean /= double(draws * 8);
    REQUIRE_THAT(power, Catch::Matchers::WithinAbs(1.0, 0.01));
    REQUIRE(std::abs(mean.real()) < 0.01);
    REQUIRE(std::abs(mean.imag()) < 0.01);
}

TEST_CASE("channel sampling is deterministic under a fixed seed") {
    Rng a(77), b(77);
    const ChannelRealization ha = sample_channel(a);
    const ChannelRealization hb = sample_channel(b);
    REQUIRE(testutil::mat_dist(ha.h, hb.h) == 0.0);
}

TEST_CASE("noise variance tracks N0") {
    Rng rng(32);
    const NoiseParams np{0.37};
    const std::size_t draws = 125'000;
    double var = 0.0;
    for (std::size_t t = 0; t < draws; ++t) {
        const ComplexMat n = sample_noise(rng, np);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 4; ++c) var += std::norm(n(r, c));
    }
    var /= double(draws * 8);
    REQUIRE_THAT(var, Catch::Matchers::WithinRel(np.n0, 0.02));

    Rng z(33);
    const ComplexMat silent = sample_noise(z, NoiseParams{0.0});
    REQUIRE(silent.frobenius_norm() == 0.0);
}

TEST_CASE("transmit applies Y = HS + N") {
    Rng rng(34);
    const ChannelRealization zero{ComplexMat(2, 4)};
    const ComplexMat s = testutil::random_complex(rng, 4, 4);
    const ComplexMat n = testutil::random_complex(rng, 2, 4);
    REQUIRE(testutil::mat_dist(transmit(zero, s, n), n) == 0.0);

    const ChannelRealization ch = sample_channel(rng);
    const ComplexMat clean = transmit(ch, s, ComplexMat(2, 4));
    REQUIRE(testutil::mat_dist(clean, ch.h * s) == 0.0);
}

TEST_CASE("received matrix matches the real equivalent model") {
    Rng rng(35);
    const double tg = ciod_angle();
    const LinearDispersionCode code = weight_matrices(tg);
    for (int t = 0; t < 25; ++t) {
        const ChannelRealization ch = sample_channel(rng);
        const RealEquivalentModel model = build_equivalent(ch, code);
        const auto x = testutil::random_symbols(rng);
        const ComplexMat y = transmit(ch, encode(x, tg), ComplexMat(2, 4));
        const RealVec lhs = vec_real(y);
        const RealVec rhs = matvec(model.h_eq_prime, interleave(x));
        double err = 0.0;
        for (std::size_t i = 0; i < 16; ++i) err += (lhs[i] - rhs[i]) * (lhs[i] - rhs[i]);
        REQUIRE(std::sqrt(err) < 1e-10);
    }
}

TEST_CASE("n0_for_snr normalization") {
    REQUIRE_THAT(n0_for_snr(6.02).n0, Catch::Matchers::WithinAbs(1.0, 2e-3));
    REQUIRE(n0_for_snr(80.0).n0 < 1e-7);
    REQUIRE_THAT(n0_for_snr(0.0).n0, Catch::Matchers::WithinAbs(4.0, 1e-12));
}

TEST_CASE("received SNR matches the requested value") {
    Rng rng(36);
    const double tg = ciod_angle();
    const Constellation aq = square_qam(4);
    for (double snr_db : {0.0, 10.0}) {
        const NoiseParams np = n0_for_snr(snr_db);
        double sig = 0.0, noise = 0.0;
        const std::size_t draws = 100'000;
        for (std::size_t t = 0; t < draws; ++t) {
            std::array<cdouble, 8> x;
            for (auto& v : x) v = aq.points[rng.uniform_int(4)];
            const ChannelRealization ch = sample_channel(rng);
            const ComplexMat hs = ch.h * encode(x, tg);
            const ComplexMat n = sample_noise(rng, np);
            const double hsn = hs.frobenius_norm(), nn = n.frobenius_norm();
            sig += hsn * hsn;
            noise += nn * nn;
        }
        REQUIRE_THAT(sig / noise,
                     Catch::Matchers::WithinRel(std::pow(10.0, snr_db / 10.0), 0.02));
    }
}

TEST_CASE("codeword energy statistics") {
    Rng rng(37);
    const double tg = ciod_angle();
    const Constellation aq = square_qam(4);
    double es = 0.0, ehs = 0.0;
    const std::size_t draws = 100'000;
    for (std::size_t t = 0; t < draws; ++t) {
        std::array<cdouble, 8> x;
        for (auto& v : x) v = aq.points[rng.uniform_int(4)];
        const ComplexMat s = encode(x, tg);
        const double sn = s.frobenius_norm();
        es += sn * sn;
        const ChannelRealization ch = sample_channel(rng);
        const double hn = (ch.h * s).frobenius_norm();
        ehs += hn * hn;
    }
    REQUIRE_THAT(es / double(draws), Catch::Matchers::WithinRel(16.0, 0.02));
    REQUIRE_THAT(ehs / double(draws), Catch::Matchers::WithinRel(32.0, 0.02));
}
