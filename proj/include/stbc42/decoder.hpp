#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "stbc42/channel.hpp"
#include "stbc42/code.hpp"
#include "stbc42/constellation.hpp"
#include "stbc42/errors.hpp"
#include "stbc42/linalg.hpp"

namespace stbc42 {

/// Entries below this fraction of ||R||_F count as structurally zero.
inline constexpr double kZeroPatternTol = 1e-9;

/// Real 16x16 model of one fading block: vec_real(H*encode(x)) =
/// h_eq_prime * xtilde with the fixed coordinate ordering
/// [x1I, x1Q, ..., x4Q | x5I, ..., x8Q], plus its Gram-Schmidt QR factors.
struct RealEquivalentModel {
    RealMat h_eq_prime; // 16x16
    RealMat q;          // 16x16 orthonormal
    RealMat r;          // 16x16 upper triangular, positive diagonal

    /// The coordinate each column carries, independent of the channel.
    static std::array<const char*, 16> column_order() {
        return {"x1I", "x1Q", "x2I", "x2Q", "x3I", "x3Q", "x4I", "x4Q",
                "x5I", "x5Q", "x6I", "x6Q", "x7I", "x7Q", "x8I", "x8Q"};
    }
};

/// Decoded symbols with the achieved metric and complexity counters.
/// metric_evaluations counts complete candidate metrics (leaves for the
/// sphere decoder, per-symbol inner metrics for the conditional decoder);
/// nodes_visited counts sphere-decoder tree expansions and is zero for
/// the other decoders.
struct DecodeResult {
    SymbolVector x_hat;
    double metric = 0.0;
    std::uint64_t metric_evaluations = 0;
    std::uint64_t nodes_visited = 0;
};

/// H'_eq = (I_4 (x) check(H)) * G.  The generator already absorbs the
/// constellation rotation, so no separate F factor is applied here.
/// Throws RankDeficient for degenerate channels (caller falls back to
/// exhaustive search).
inline RealEquivalentModel build_equivalent(const ChannelRealization& ch,
                                            const LinearDispersionCode& code) {
    const RealMat lifted = kron(RealMat::identity(4), check_op(ch.h));
    const RealMat h_eq_prime = lifted * generator_matrix(code);
    QrResult qr = gram_schmidt_qr(h_eq_prime);
    return RealEquivalentModel{h_eq_prime, std::move(qr.q), std::move(qr.r)};
}

/// Verifies the sparsity pattern that makes the two-stage search valid:
/// R = [[R1, R2], [0, R3]] with R1 made of four 2x2 upper-triangular
/// diagonal blocks, positive diagonal throughout.
inline bool qr_structure_check(const RealEquivalentModel& model) {
    const RealMat& r = model.r;
    const double cut = kZeroPatternTol * r.frobenius_norm();
    for (std::size_t i = 0; i < 16; ++i) {
        if (r(i, i) <= 0.0) return false;
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(r(i, j)) >= cut) return false;
    }
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = i + 1; j < 8; ++j) {
            const bool own_block = (j == i + 1) && (i % 2 == 0);
            if (!own_block && std::abs(r(i, j)) >= cut) return false;
        }
    return true;
}

/// ||Y - H*encode(x_hat)||_F^2 by direct complex arithmetic; the
/// independent recomputation every decoder's reported metric is checked
/// against.
inline double residual_metric(const ComplexMat& y, const ChannelRealization& ch,
                              const std::array<cdouble, 8>& x_hat, double theta_g,
                              double theta = kDefaultTheta) {
    const ComplexMat d = y - ch.h * encode(x_hat, theta_g, theta);
    const double n = d.frobenius_norm();
    return n * n;
}

/// T_m(v) = v_I * A_{2m+1} + v_Q * A_{2m+2} (0-based slot m), the codeword
/// contribution of a single symbol.
inline ComplexMat symbol_contribution(const LinearDispersionCode& code, std::size_t m,
                                      cdouble v) {
    ComplexMat t(code.n_t, code.block_length);
    for (std::size_t r = 0; r < code.n_t; ++r)
        for (std::size_t c = 0; c < code.block_length; ++c)
            t(r, c) = v.real() * code.weights[2 * m](r, c) +
                      v.imag() * code.weights[2 * m + 1](r, c);
    return t;
}

/// The conditional decomposition of the ML metric for fixed (x5..x8):
/// M(S) = sum_m M(x_m) + M_c with
///   M(x_m) = ||Y - H T_m||_F^2 + 2 Re tr[H S2 (H T_m)^H]
///   M_c    = ||Y - H S2||_F^2 - 4 tr(Y Y^H).
struct MetricDecomposition {
    std::array<double, 4> per_symbol{};
    double constant = 0.0;

    double total() const {
        return per_symbol[0] + per_symbol[1] + per_symbol[2] + per_symbol[3] + constant;
    }
};

inline MetricDecomposition conditional_metric_terms(const ComplexMat& y,
                                                    const ChannelRealization& ch,
                                                    const std::array<cdouble, 8>& x,
                                                    const LinearDispersionCode& code) {
    ComplexMat s2(4, 4);
    for (std::size_t m = 4; m < 8; ++m) s2 += symbol_contribution(code, m, x[m]);
    const ComplexMat hs2 = ch.h * s2;

    MetricDecomposition out;
    for (std::size_t m = 0; m < 4; ++m) {
        const ComplexMat ht = ch.h * symbol_contribution(code, m, x[m]);
        const ComplexMat d = y - ht;
        double cross = 0.0; // Re tr[H S2 (H T_m)^H]
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 4; ++c)
                cross += (hs2(r, c) * std::conj(ht(r, c))).real();
        const double dn = d.frobenius_norm();
        out.per_symbol[m] = dn * dn + 2.0 * cross;
    }
    const ComplexMat dy = y - hs2;
    const double dyn = dy.frobenius_norm(), yn = y.frobenius_norm();
    out.constant = dyn * dyn - 4.0 * yn * yn;
    return out;
}

namespace detail {

// H * T_m(v) for every slot and candidate, the shared precomputation of
// the exhaustive and conditional decoders.
inline std::vector<std::vector<ComplexMat>> channel_terms(const ChannelRealization& ch,
                                                          const LinearDispersionCode& code,
                                                          const Constellation& aq) {
    std::vector<std::vector<ComplexMat>> hc(8);
    for (std::size_t m = 0; m < 8; ++m) {
        hc[m].reserve(aq.size());
        for (const auto& p : aq.points) hc[m].push_back(ch.h * symbol_contribution(code, m, p));
    }
    return hc;
}

inline double frob2_diff(const ComplexMat& a, const ComplexMat& b) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) s += std::norm(a(r, c) - b(r, c));
    return s;
}

// Square-QAM grid view of a constellation: sorted PAM levels per axis and
// the point index for every (real level, imag level) pair.  Returns false
// when the point set is not a full rectangular grid.
struct GridView {
    std::vector<double> pam;                       // sorted coordinate levels
    std::vector<std::vector<int>> index_of;        // [re level][im level] -> point index
};

inline bool make_grid_view(const Constellation& c, GridView& view, double tol = 1e-9) {
    std::vector<double> res, ims;
    auto insert_level = [tol](std::vector<double>& v, double x) {
        for (double e : v)
            if (std::abs(e - x) <= tol) return;
        v.push_back(x);
    };
    for (const auto& p : c.points) {
        insert_level(res, p.real());
        insert_level(ims, p.imag());
    }
    std::sort(res.begin(), res.end());
    std::sort(ims.begin(), ims.end());
    if (res.size() != ims.size() || res.size() * ims.size() != c.size()) return false;
    for (std::size_t i = 0; i < res.size(); ++i)
        if (std::abs(res[i] - ims[i]) > tol) return false;

    const std::size_t l = res.size();
    view.pam = res;
    view.index_of.assign(l, std::vector<int>(l, -1));
    for (std::size_t v = 0; v < c.size(); ++v) {
        std::size_t ix = l, iy = l;
        for (std::size_t i = 0; i < l; ++i) {
            if (std::abs(c.points[v].real() - res[i]) <= tol) ix = i;
            if (std::abs(c.points[v].imag() - ims[i]) <= tol) iy = i;
        }
        if (ix == l || iy == l || view.index_of[ix][iy] != -1) return false;
        view.index_of[ix][iy] = int(v);
    }
    return true;
}

} // namespace detail

/// Global argmin of ||Y - HS||_F^2 over all M^8 codewords, enumerated in
/// lexicographic symbol-index order with strict improvement, so ties
/// resolve to the smallest index vector.  The oracle the other decoders
/// are validated against.
inline DecodeResult ml_exhaustive(const ComplexMat& y, const ChannelRealization& ch,
                                  const LinearDispersionCode& code, const Constellation& aq,
                                  std::uint64_t budget = 10'000'000) {
    const std::size_t m_order = aq.size();
    double total = 1.0;
    for (int i = 0; i < 8; ++i) {
        total *= double(m_order);
        if (total > double(budget))
            throw SearchSpaceTooLarge("ml_exhaustive: M^8 exceeds budget at M=" +
                                      std::to_string(m_order));
    }

    const auto hc = detail::channel_terms(ch, code, aq);
    std::array<ComplexMat, 9> partial;
    for (auto& p : partial) p = ComplexMat(2, 4);
    std::array<std::uint8_t, 8> idx{};

    DecodeResult best;
    best.metric = std::numeric_limits<double>::infinity();
    std::array<std::uint8_t, 8> best_idx{};

    auto add_into = [](const ComplexMat& a, const ComplexMat& b, ComplexMat& out) {
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 4; ++c) out(r, c) = a(r, c) + b(r, c);
    };

    auto descend = [&](auto&& self, std::size_t depth) -> void {
        if (depth == 8) {
            ++best.metric_evaluations;
            const double metric = detail::frob2_diff(y, partial[8]);
            if (metric < best.metric ||
                (metric == best.metric && idx < best_idx)) {
                best.metric = metric;
                best_idx = idx;
            }
            return;
        }
        for (std::size_t v = 0; v < m_order; ++v) {
            idx[depth] = std::uint8_t(v);
            add_into(partial[depth], hc[depth][v], partial[depth + 1]);
            self(self, depth + 1);
        }
    };
    descend(descend, 0);

    for (std::size_t m = 0; m < 8; ++m) {
        best.x_hat.idx[m] = best_idx[m];
        best.x_hat.x[m] = aq.points[best_idx[m]];
    }
    return best;
}

/// Conditional ML: for each (x5..x8) quadruplet the four remaining symbols
/// decouple, so each is minimized independently over M candidates.  Worst
/// case 4*M^5 per-symbol metric computations, the code's headline
/// complexity figure.
inline DecodeResult ml_conditional(const ComplexMat& y, const ChannelRealization& ch,
                                   const LinearDispersionCode& code, const Constellation& aq) {
    const std::size_t m_order = aq.size();
    const auto hc = detail::channel_terms(ch, code, aq);

    DecodeResult best;
    best.metric = std::numeric_limits<double>::infinity();
    std::array<std::uint8_t, 8> best_idx{};

    std::array<ComplexMat, 5> partial; // Y minus accumulated outer terms
    partial[0] = y;
    for (std::size_t i = 1; i < 5; ++i) partial[i] = ComplexMat(2, 4);
    std::array<std::uint8_t, 8> idx{};

    auto sub_into = [](const ComplexMat& a, const ComplexMat& b, ComplexMat& out) {
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 4; ++c) out(r, c) = a(r, c) - b(r, c);
    };

    auto outer = [&](auto&& self, std::size_t depth) -> void {
        if (depth == 8) {
            const ComplexMat& yp = partial[4]; // Y - H*S2
            double total = 0.0;
            for (std::size_t m = 0; m < 4; ++m) {
                double best_inner = std::numeric_limits<double>::infinity();
                std::size_t best_v = 0;
                for (std::size_t v = 0; v < m_order; ++v) {
                    ++best.metric_evaluations;
                    const double c = detail::frob2_diff(yp, hc[m][v]);
                    if (c < best_inner) {
                        best_inner = c;
                        best_v = v;
                    }
                }
                idx[m] = std::uint8_t(best_v);
                total += best_inner;
            }
            const double ypn = yp.frobenius_norm();
            total -= 3.0 * ypn * ypn; // = ||Y - HS||_F^2 by quasi-orthogonality
            if (total < best.metric || (total == best.metric && idx < best_idx)) {
                best.metric = total;
                best_idx = idx;
            }
            return;
        }
        for (std::size_t v = 0; v < m_order; ++v) {
            idx[depth] = std::uint8_t(v);
            sub_into(partial[depth - 4], hc[depth][v], partial[depth - 3]);
            self(self, depth + 1);
        }
    };
    outer(outer, 4);

    for (std::size_t m = 0; m < 8; ++m) {
        best.x_hat.idx[m] = best_idx[m];
        best.x_hat.x[m] = aq.points[best_idx[m]];
    }
    return best;
}

/// Two-stage structured sphere decoder of the real equivalent model:
/// Schnorr-Euchner depth-first search over the last eight rows (the x5..x8
/// coordinates), then four independent 2-dim solves over the R1 blocks at
/// every surviving leaf, radius tightened at each completed candidate.
/// Exact ML; falls back to ml_conditional for non-grid constellations and
/// propagates RankDeficient from the QR step.
inline DecodeResult sphere_decode(const ComplexMat& y, const ChannelRealization& ch,
                                  const LinearDispersionCode& code, const Constellation& aq) {
    detail::GridView grid;
    if (!detail::make_grid_view(aq, grid)) return ml_conditional(y, ch, code, aq);

    const RealEquivalentModel model = build_equivalent(ch, code);
    const RealMat& r = model.r;
    const RealVec z = matvec(model.q.transpose(), vec_real(y));

    const std::size_t l = grid.pam.size(); // PAM order per axis
    const std::size_t m_order = aq.size();

    DecodeResult best;
    best.metric = std::numeric_limits<double>::infinity();
    std::array<std::uint8_t, 8> best_idx{};

    // Stage-1 state over levels 15 down to 8 (coordinates x8Q .. x5I).
    std::array<double, 17> cost{};        // cost[i] = partial cost of levels >= i
    std::array<std::size_t, 16> level_of; // PAM level chosen per coordinate
    std::array<std::uint8_t, 8> idx{};

    // Candidate PAM positions at one level, Schnorr-Euchner ordered.
    std::array<std::array<std::size_t, 16>, 16> order{};

    auto solve_leaf = [&]() {
        ++best.metric_evaluations;
        // Symbol indices for x5..x8 from the chosen coordinate levels.
        for (std::size_t m = 4; m < 8; ++m)
            idx[m] = std::uint8_t(grid.index_of[level_of[2 * m]][level_of[2 * m + 1]]);

        double total = cost[8];
        for (std::size_t m = 0; m < 4; ++m) {
            const std::size_t r0 = 2 * m, r1 = 2 * m + 1;
            double t0 = z[r0], t1 = z[r1];
            for (std::size_t j = 8; j < 16; ++j) {
                const double xj = grid.pam[level_of[j]];
                t0 -= r(r0, j) * xj;
                t1 -= r(r1, j) * xj;
            }
            double inner_best = std::numeric_limits<double>::infinity();
            std::size_t inner_v = 0;
            for (std::size_t v = 0; v < m_order; ++v) {
                const double vi = aq.points[v].real(), vq = aq.points[v].imag();
                const double e0 = t0 - r(r0, r0) * vi - r(r0, r1) * vq;
                const double e1 = t1 - r(r1, r1) * vq;
                const double c = e0 * e0 + e1 * e1;
                if (c < inner_best) {
                    inner_best = c;
                    inner_v = v;
                }
            }
            idx[m] = std::uint8_t(inner_v);
            total += inner_best;
        }
        if (total < best.metric || (total == best.metric && idx < best_idx)) {
            best.metric = total;
            best_idx = idx;
        }
    };

    auto descend = [&](auto&& self, int level) -> void {
        if (level < 8) {
            solve_leaf();
            return;
        }
        ++best.nodes_visited;
        double e = z[std::size_t(level)];
        for (std::size_t j = std::size_t(level) + 1; j < 16; ++j)
            e -= r(std::size_t(level), j) * grid.pam[level_of[j]];
        const double center = e / r(std::size_t(level), std::size_t(level));

        auto& ord = order[std::size_t(level)];
        for (std::size_t p = 0; p < l; ++p) ord[p] = p;
        std::sort(ord.begin(), ord.begin() + long(l), [&](std::size_t a, std::size_t b) {
            const double da = std::abs(grid.pam[a] - center);
            const double db = std::abs(grid.pam[b] - center);
            return da != db ? da < db : grid.pam[a] < grid.pam[b];
        });

        for (std::size_t p = 0; p < l; ++p) {
            const double w = grid.pam[ord[p]];
            const double step = e - r(std::size_t(level), std::size_t(level)) * w;
            const double c = cost[std::size_t(level) + 1] + step * step;
            if (c > best.metric) break; // SE order: later candidates only worse
            level_of[std::size_t(level)] = ord[p];
            cost[std::size_t(level)] = c;
            self(self, level - 1);
        }
    };
    descend(descend, 15);

    for (std::size_t m = 0; m < 8; ++m) {
        best.x_hat.idx[m] = best_idx[m];
        best.x_hat.x[m] = aq.points[best_idx[m]];
    }
    return best;
}

} // namespace stbc42
