#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "stbc42/code.hpp"
#include "stbc42/constellation.hpp"
#include "stbc42/errors.hpp"
#include "stbc42/linalg.hpp"
#include "stbc42/rng.hpp"

namespace stbc42 {

/// Determinants at or below this are treated as singular (rank < 4).
inline constexpr double kSingularDetTol = 1e-9;

/// Per-symbol difference set D = {a - b : a, b in A_q}, sorted by (re, im).
/// Built exactly negation-symmetric around the zero entry, so index i
/// negates to index size()-1-i and the positive half is everything above
/// the zero index.
struct DifferenceAlphabet {
    std::vector<cdouble> values;
    std::size_t zero_index = 0;

    static DifferenceAlphabet from_constellation(const Constellation& c, double tol = 1e-9) {
        std::vector<cdouble> pos;
        for (const auto& a : c.points)
            for (const auto& b : c.points) {
                const cdouble d = a - b;
                const bool positive = d.real() > tol ||
                                      (std::abs(d.real()) <= tol && d.imag() > tol);
                if (!positive) continue;
                bool seen = false;
                for (const auto& v : pos)
                    if (std::abs(v.real() - d.real()) <= tol &&
                        std::abs(v.imag() - d.imag()) <= tol) {
                        seen = true;
                        break;
                    }
                if (!seen) pos.push_back(d);
            }
        std::sort(pos.begin(), pos.end(), [](const cdouble& x, const cdouble& y) {
            return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
        });
        DifferenceAlphabet d;
        for (auto it = pos.rbegin(); it != pos.rend(); ++it) d.values.push_back(-*it);
        d.zero_index = d.values.size();
        d.values.emplace_back(0.0, 0.0);
        d.values.insert(d.values.end(), pos.begin(), pos.end());
        return d;
    }

    std::size_t size() const { return values.size(); }
    std::size_t negate_index(std::size_t i) const { return values.size() - 1 - i; }
};

struct CodeAnalysisReport {
    double min_det = std::numeric_limits<double>::infinity();
    int min_rank = 4;
    double coding_gain = 0.0;
    std::vector<cdouble> argmin_dx;   // lex-smallest witness (by alphabet index)
    std::uint64_t pairs_evaluated = 0;
    std::string mode = "exhaustive";  // "exhaustive" | "sampled"
    double max_imag_residue = 0.0;    // largest |Im det| seen, sanity only

    // Smallest product of nonzero eigenvalues of (dS)(dS)^H over all
    // evaluated pairs; equals min_det while every pair is full rank.
    double min_eig_product = std::numeric_limits<double>::infinity();
};

struct AnalysisOptions {
    std::uint64_t budget = 100'000'000; // hard cap on exhaustive evaluations
    unsigned workers = 0;               // 0 = hardware concurrency
};

/// Codeword difference matrix from a symbol-difference vector; valid
/// because the encoder is real-linear in the coordinates.
inline ComplexMat difference_codeword(const std::vector<cdouble>& dx,
                                      const LinearDispersionCode& code) {
    RealVec xt(2 * code.num_symbols);
    for (std::size_t i = 0; i < code.num_symbols; ++i) {
        xt[2 * i] = dx[i].real();
        xt[2 * i + 1] = dx[i].imag();
    }
    return code.combine(xt);
}

namespace detail {

// Dense 4x4 scratch codeword, row-major.
using Scratch = std::array<cdouble, 16>;

// contrib[m][di] = D[di].re * A_{2m} + D[di].im * A_{2m+1}, the codeword
// contribution of symbol slot m taking difference value D[di].
inline std::vector<std::vector<Scratch>> build_contrib(const LinearDispersionCode& code,
                                                       const DifferenceAlphabet& alpha) {
    std::vector<std::vector<Scratch>> contrib(code.num_symbols);
    for (std::size_t m = 0; m < code.num_symbols; ++m) {
        contrib[m].resize(alpha.size());
        for (std::size_t di = 0; di < alpha.size(); ++di) {
            Scratch s{};
            const cdouble d = alpha.values[di];
            for (std::size_t r = 0; r < 4; ++r)
                for (std::size_t c = 0; c < 4; ++c)
                    s[4 * r + c] = d.real() * code.weights[2 * m](r, c) +
                                   d.imag() * code.weights[2 * m + 1](r, c);
            contrib[m][di] = s;
        }
    }
    return contrib;
}

// det[(dS)(dS)^H] for a 4x4 codeword difference; returns the real part and
// reports |Im| so callers can check the Hermitian-determinant sanity bound.
inline double gram_det4(const Scratch& s, double& imag_abs) {
    cdouble g[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            cdouble acc{0.0, 0.0};
            for (int k = 0; k < 4; ++k) acc += s[4 * i + k] * std::conj(s[4 * j + k]);
            g[i][j] = acc;
            g[j][i] = std::conj(acc);
        }
    cdouble det{1.0, 0.0};
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        double best = std::norm(g[c][c]);
        for (int r = c + 1; r < 4; ++r)
            if (std::norm(g[r][c]) > best) { best = std::norm(g[r][c]); piv = r; }
        if (best == 0.0) { imag_abs = 0.0; return 0.0; }
        if (piv != c) {
            for (int j = c; j < 4; ++j) std::swap(g[c][j], g[piv][j]);
            det = -det;
        }
        det *= g[c][c];
        for (int r = c + 1; r < 4; ++r) {
            const cdouble f = g[r][c] / g[c][c];
            for (int j = c + 1; j < 4; ++j) g[r][j] -= f * g[c][j];
        }
    }
    imag_abs = std::abs(det.imag());
    return det.real();
}

// Rank and nonzero-eigenvalue product of (dS)(dS)^H, used only on pairs
// whose determinant fell below the singular cut.
inline void rank_and_product(const Scratch& s, int& rank, double& product) {
    ComplexMat m(4, 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) m(r, c) = s[4 * r + c];
    const RealVec ev = hermitian_eigenvalues(m * m.adjoint());
    const double lmax = std::max(ev.front(), 0.0);
    // Numerical rank of dS: singular values above 1e-9 of the largest,
    // i.e. eigenvalues of the Gram matrix above (1e-9)^2 of its largest.
    const double cut = lmax * 1e-18;
    rank = 0;
    product = 1.0;
    for (double l : ev)
        if (l > cut && l > 0.0) {
            ++rank;
            product *= l;
        }
    if (rank == 0) product = 0.0;
}

struct SearchAccum {
    double min_det = std::numeric_limits<double>::infinity();
    int min_rank = 4;
    double min_eig_product = std::numeric_limits<double>::infinity();
    std::vector<std::uint16_t> argmin;
    std::uint64_t evals = 0;
    double max_imag = 0.0;

    void consider(const Scratch& s, const std::uint16_t* idx, std::size_t k,
                  const DifferenceAlphabet& alpha) {
        ++evals;
        double imag_abs = 0.0;
        const double det = gram_det4(s, imag_abs);
        max_imag = std::max(max_imag, imag_abs);

        int rank = 4;
        double product = det;
        if (det <= kSingularDetTol) rank_and_product(s, rank, product);
        min_rank = std::min(min_rank, rank);
        min_eig_product = std::min(min_eig_product, product);

        if (det < min_det || (det == min_det && lex_smaller(idx, k, alpha))) {
            min_det = det;
            argmin = normalized(idx, k, alpha);
        }
    }

    void merge(const SearchAccum& o) {
        evals += o.evals;
        max_imag = std::max(max_imag, o.max_imag);
        min_rank = std::min(min_rank, o.min_rank);
        min_eig_product = std::min(min_eig_product, o.min_eig_product);
        if (o.min_det < min_det ||
            (o.min_det == min_det && !o.argmin.empty() &&
             (argmin.empty() || o.argmin < argmin))) {
            min_det = o.min_det;
            argmin = o.argmin;
        }
    }

private:
    static std::vector<std::uint16_t> normalized(const std::uint16_t* idx, std::size_t k,
                                                 const DifferenceAlphabet& alpha) {
        std::vector<std::uint16_t> v(idx, idx + k), w(k);
        for (std::size_t i = 0; i < k; ++i)
            w[i] = static_cast<std::uint16_t>(alpha.negate_index(v[i]));
        return std::min(v, w);
    }

    bool lex_smaller(const std::uint16_t* idx, std::size_t k,
                     const DifferenceAlphabet& alpha) const {
        if (argmin.empty()) return true;
        return normalized(idx, k, alpha) < argmin;
    }
};

// One enumeration task: coordinates below `lead_pos` are zero, `lead_pos`
// takes `lead_idx` from the positive half, an optional pinned second
// coordinate splits big tasks, and everything after runs over the full
// alphabet.
struct Task {
    std::size_t lead_pos;
    std::uint16_t lead_idx;
    int second_idx; // -1 = unpinned
};

inline void run_task(const Task& t, const std::vector<std::vector<Scratch>>& contrib,
                     const DifferenceAlphabet& alpha, std::size_t k, SearchAccum& acc) {
    const std::size_t n = alpha.size();
    std::array<std::uint16_t, 8> idx{};
    std::array<Scratch, 9> partial{};
    for (std::size_t p = 0; p < t.lead_pos; ++p)
        idx[p] = static_cast<std::uint16_t>(alpha.zero_index);
    // partial[d] = contribution of symbols 0..d-1; leading zeros add nothing.
    partial[t.lead_pos] = Scratch{};
    idx[t.lead_pos] = t.lead_idx;

    auto add = [](const Scratch& a, const Scratch& b, Scratch& out) {
        for (std::size_t i = 0; i < 16; ++i) out[i] = a[i] + b[i];
    };
    add(partial[t.lead_pos], contrib[t.lead_pos][t.lead_idx], partial[t.lead_pos + 1]);

    std::size_t start = t.lead_pos + 1;
    if (t.second_idx >= 0) {
        idx[start] = static_cast<std::uint16_t>(t.second_idx);
        add(partial[start], contrib[start][std::size_t(t.second_idx)], partial[start + 1]);
        ++start;
    }

    // Depth-first odometer over the remaining coordinates.
    auto descend = [&](auto&& self, std::size_t depth) -> void {
        if (depth == k) {
            acc.consider(partial[k], idx.data(), k, alpha);
            return;
        }
        for (std::size_t di = 0; di < n; ++di) {
            idx[depth] = static_cast<std::uint16_t>(di);
            add(partial[depth], contrib[depth][di], partial[depth + 1]);
            self(self, depth + 1);
        }
    };
    descend(descend, start);
}

inline CodeAnalysisReport finalize(SearchAccum acc, const DifferenceAlphabet& alpha,
                                   std::size_t k, const std::string& mode) {
    CodeAnalysisReport rep;
    // Gram determinants are nonnegative; tiny negative values are LU noise
    // from structurally singular pairs.
    rep.min_det = std::max(acc.min_det, 0.0);
    rep.min_rank = acc.min_rank;
    rep.min_eig_product = acc.min_eig_product;
    rep.pairs_evaluated = acc.evals;
    rep.max_imag_residue = acc.max_imag;
    rep.mode = mode;
    rep.argmin_dx.reserve(k);
    for (std::size_t i = 0; i < acc.argmin.size(); ++i)
        rep.argmin_dx.push_back(alpha.values[acc.argmin[i]]);
    if (rep.min_rank == 4)
        rep.coding_gain = std::pow(std::max(rep.min_det, 0.0), 0.25);
    else if (rep.min_rank > 0)
        rep.coding_gain = std::pow(std::max(rep.min_eig_product, 0.0), 1.0 / rep.min_rank);
    return rep;
}

} // namespace detail

/// Coding gain from a finished report: (min det)^(1/4) when full rank,
/// otherwise the min-rank-th root of the smallest nonzero-eigenvalue
/// product seen over the search.
inline double coding_gain(const CodeAnalysisReport& rep) {
    if (rep.min_rank == 4) return std::pow(std::max(rep.min_det, 0.0), 0.25);
    if (rep.min_rank > 0) return std::pow(std::max(rep.min_eig_product, 0.0), 1.0 / rep.min_rank);
    return 0.0;
}

/// Exhaustive minimum determinant over all nonzero difference vectors,
/// halved by the dx <-> -dx symmetry.  Throws SearchSpaceTooLarge when the
/// halved count exceeds options.budget (so 16-QAM must use the sampled mode).
inline CodeAnalysisReport min_determinant(const LinearDispersionCode& code,
                                          const Constellation& constellation,
                                          const AnalysisOptions& options = {}) {
    const auto alpha = DifferenceAlphabet::from_constellation(constellation);
    const std::size_t k = code.num_symbols;
    const std::size_t n = alpha.size();

    double planned = 0.0;
    for (std::size_t p = 0; p < k; ++p)
        planned += double(n - 1 - alpha.zero_index) * std::pow(double(n), double(k - 1 - p));
    if (planned > double(options.budget))
        throw SearchSpaceTooLarge("min_determinant: " + std::to_string(std::uint64_t(planned)) +
                                  " evaluations exceed budget " + std::to_string(options.budget));

    const auto contrib = detail::build_contrib(code, alpha);

    std::vector<detail::Task> tasks;
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t li = alpha.zero_index + 1; li < n; ++li) {
            if (p + 1 < k && p == 0) {
                for (std::size_t si = 0; si < n; ++si)
                    tasks.push_back({p, std::uint16_t(li), int(si)});
            } else {
                tasks.push_back({p, std::uint16_t(li), -1});
            }
        }

    unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, unsigned(tasks.size())));

    std::vector<detail::SearchAccum> slots(tasks.size());
    if (workers == 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t)
            detail::run_task(tasks[t], contrib, alpha, k, slots[t]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1))
                    detail::run_task(tasks[t], contrib, alpha, k, slots[t]);
            });
        for (auto& th : pool) th.join();
    }

    detail::SearchAccum total;
    for (const auto& s : slots) total.merge(s);
    return detail::finalize(std::move(total), alpha, k, "exhaustive");
}

/// Minimum rank of the difference codeword over the same search space.
inline int diversity_rank(const LinearDispersionCode& code, const Constellation& constellation,
                          const AnalysisOptions& options = {}) {
    return min_determinant(code, constellation, options).min_rank;
}

/// Upper-bound estimate for orders where exhaustion is infeasible:
/// exhaustive over all weight-1 and weight-2 difference patterns plus
/// `samples` seeded random vectors.  Never reported as the true minimum.
inline CodeAnalysisReport min_determinant_sampled(const LinearDispersionCode& code,
                                                  const Constellation& constellation,
                                                  std::uint64_t samples, std::uint64_t seed) {
    const auto alpha = DifferenceAlphabet::from_constellation(constellation);
    const std::size_t k = code.num_symbols;
    const std::size_t n = alpha.size();
    const auto contrib = detail::build_contrib(code, alpha);
    const auto zero = std::uint16_t(alpha.zero_index);

    detail::SearchAccum acc;
    std::array<std::uint16_t, 8> idx{};
    detail::Scratch s{};
    auto evaluate = [&] {
        for (auto& v : s) v = cdouble{};
        for (std::size_t m = 0; m < k; ++m) {
            if (idx[m] == zero) continue;
            const auto& c = contrib[m][idx[m]];
            for (std::size_t i = 0; i < 16; ++i) s[i] += c[i];
        }
        acc.consider(s, idx.data(), k, alpha);
    };

    idx.fill(zero);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t di = 0; di < n; ++di) {
            if (di == alpha.zero_index) continue;
            idx[p] = std::uint16_t(di);
            evaluate();
            for (std::size_t q = p + 1; q < k; ++q) {
                for (std::size_t dj = 0; dj < n; ++dj) {
                    if (dj == alpha.zero_index) continue;
                    idx[q] = std::uint16_t(dj);
                    evaluate();
                }
                idx[q] = zero;
            }
        }
        idx[p] = zero;
    }

    Rng rng(seed);
    for (std::uint64_t draw = 0; draw < samples; ++draw) {
        bool nonzero = false;
        for (std::size_t m = 0; m < k; ++m) {
            idx[m] = std::uint16_t(rng.uniform_int(std::uint32_t(n)));
            nonzero = nonzero || idx[m] != zero;
        }
        if (!nonzero) continue;
        evaluate();
    }

    return detail::finalize(std::move(acc), alpha, k, "sampled");
}

} // namespace stbc42
