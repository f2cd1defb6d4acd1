#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "stbc42/errors.hpp"

namespace stbc42 {

using cdouble = std::complex<double>;
using RealVec = std::vector<double>;

/// Dense matrix over double or complex<double>, row-major storage.
/// Sizes in this library never exceed 32x16, so everything is plain
/// O(n^3) scalar code with no blocking.
template <typename T>
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, T{}) {}

    static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<T>& data() const { return data_; }

    Mat& operator+=(const Mat& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Mat& operator*=(T s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(T s, Mat a) { return a *= s; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        Mat c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Conjugate transpose (plain transpose for real T).
    Mat adjoint() const {
        Mat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) {
                if constexpr (std::is_same_v<T, cdouble>)
                    t(j, i) = std::conj((*this)(i, j));
                else
                    t(j, i) = (*this)(i, j);
            }
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool is_finite() const {
        for (const auto& v : data_) {
            if (!std::isfinite(std::real(v)) || !std::isfinite(std::imag(v))) return false;
        }
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexMat = Mat<cdouble>;
using RealMat = Mat<double>;

inline RealVec matvec(const RealMat& a, const RealVec& x) {
    RealVec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline double vec_norm(const RealVec& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

/// Column-major stacking of a complex matrix into a real vector of length
/// 2*rows*cols; each entry contributes (real, imag) consecutively.
inline RealVec vec_real(const ComplexMat& m) {
    RealVec v;
    v.reserve(2 * m.rows() * m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (std::size_t r = 0; r < m.rows(); ++r) {
            v.push_back(m(r, c).real());
            v.push_back(m(r, c).imag());
        }
    return v;
}

/// Real 2x2-block representation: each complex entry s becomes
/// [[Re(s), -Im(s)], [Im(s), Re(s)]].  Ring homomorphism, so complex
/// products can be evaluated with real arithmetic.
inline RealMat check_op(const ComplexMat& m) {
    RealMat b(2 * m.rows(), 2 * m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const cdouble s = m(r, c);
            b(2 * r, 2 * c) = s.real();
            b(2 * r, 2 * c + 1) = -s.imag();
            b(2 * r + 1, 2 * c) = s.imag();
            b(2 * r + 1, 2 * c + 1) = s.real();
        }
    return b;
}

inline RealMat kron(const RealMat& a, const RealMat& b) {
    RealMat k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

struct QrResult {
    RealMat q; // rows x cols, orthonormal columns
    RealMat r; // cols x cols, upper triangular, positive diagonal
};

/// Residual norms below rank_tolerance() times the original column norm
/// are treated as linearly dependent.
inline constexpr double rank_tolerance() { return 1e-9; }

/// QR factorization by (modified) Gram-Schmidt, rows >= cols.
/// R(i,i) = ||r_i|| > 0, R(i,j) = <h_j, q_i> for j > i.
/// Throws RankDeficient when a residual collapses below tolerance.
inline QrResult gram_schmidt_qr(const RealMat& a) {
    const std::size_t n = a.rows(), k = a.cols();
    QrResult out{RealMat(n, k), RealMat(k, k)};
    std::vector<RealVec> h(k, RealVec(n));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) h[j][i] = a(i, j);

    for (std::size_t j = 0; j < k; ++j) {
        const double col_norm = vec_norm(h[j]);
        RealVec r = h[j];
        for (std::size_t p = 0; p < j; ++p) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += r[i] * out.q(i, p);
            out.r(p, j) = dot;
            for (std::size_t i = 0; i < n; ++i) r[i] -= dot * out.q(i, p);
        }
        const double rn = vec_norm(r);
        if (rn <= rank_tolerance() * col_norm)
            throw RankDeficient("gram_schmidt_qr: column " + std::to_string(j) +
                                " numerically dependent");
        out.r(j, j) = rn;
        for (std::size_t i = 0; i < n; ++i) out.q(i, j) = r[i] / rn;
    }
    return out;
}

/// Numerical rank by Gram-Schmidt residuals (non-throwing variant).
inline std::size_t numerical_rank(const RealMat& a, double tol = rank_tolerance()) {
    const std::size_t n = a.rows(), k = a.cols();
    std::vector<RealVec> basis; // orthonormal so far
    std::size_t rank = 0;
    for (std::size_t j = 0; j < k; ++j) {
        RealVec r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = a(i, j);
        const double col_norm = vec_norm(r);
        for (const auto& q : basis) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += r[i] * q[i];
            for (std::size_t i = 0; i < n; ++i) r[i] -= dot * q[i];
        }
        const double rn = vec_norm(r);
        if (rn > tol * col_norm && col_norm > 0.0) {
            for (auto& v : r) v /= rn;
            basis.push_back(std::move(r));
            ++rank;
        }
    }
    return rank;
}

/// Determinant by LU with partial pivoting; n <= 4 in this library.
inline cdouble det_complex(const ComplexMat& a) {
    const std::size_t n = a.rows();
    ComplexMat lu = a;
    cdouble det{1.0, 0.0};
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        double best = std::norm(lu(c, c));
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = std::norm(lu(r, c));
            if (m > best) { best = m; piv = r; }
        }
        if (best == 0.0) return cdouble{0.0, 0.0};
        if (piv != c) {
            for (std::size_t j = c; j < n; ++j) std::swap(lu(c, j), lu(piv, j));
            det = -det;
        }
        det *= lu(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            const cdouble f = lu(r, c) / lu(c, c);
            for (std::size_t j = c + 1; j < n; ++j) lu(r, j) -= f * lu(c, j);
        }
    }
    return det;
}

/// Eigenvalues of a small real symmetric matrix by cyclic Jacobi,
/// returned in descending order.
inline RealVec sym_eigenvalues(RealMat a) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
    }
    RealVec ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

/// Eigenvalues of a complex Hermitian matrix, descending.  Uses the
/// check-operator embedding: check_op(A) is real symmetric with each
/// eigenvalue of A doubled in multiplicity.
inline RealVec hermitian_eigenvalues(const ComplexMat& a) {
    const RealVec doubled = sym_eigenvalues(check_op(a));
    RealVec ev(a.rows());
    for (std::size_t i = 0; i < ev.size(); ++i) ev[i] = doubled[2 * i];
    return ev;
}

} // namespace stbc42
