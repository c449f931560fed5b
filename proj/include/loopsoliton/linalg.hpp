#ifndef LOOPSOLITON_LINALG_HPP
#define LOOPSOLITON_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "errors.hpp"

namespace loopsoliton {

// Dense complex matrix, row-major.  Genus-sized (tiny), so plain
// partial-pivot elimination is all we need.
class CMat {
public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols, cx fill = cx(0.0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static CMat identity(std::size_t n) {
        CMat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    CMat transposed() const {
        CMat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    CMat operator*(const CMat& o) const {
        CMat r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                cx a = (*this)(i, k);
                if (a == cx(0.0)) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }

    cvec operator*(const cvec& v) const {
        cvec r(rows_, cx(0.0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    CMat operator+(const CMat& o) const {
        CMat r = *this;
        for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] += o.data_[k];
        return r;
    }

    CMat operator-(const CMat& o) const {
        CMat r = *this;
        for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] -= o.data_[k];
        return r;
    }

    CMat operator*(const cx& s) const {
        CMat r = *this;
        for (auto& v : r.data_) v *= s;
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double norm_inf() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            m = std::max(m, s);
        }
        return m;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    cvec data_;
};

// Solves A X = B by Gaussian elimination with partial pivoting.
inline CMat solve(CMat a, CMat b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n) throw Error("solve: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > best) {
                best = std::abs(a(r, col));
                piv = r;
            }
        if (best == 0.0) throw Error("solve: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(piv, j));
        }
        cx inv = 1.0 / a(col, col);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            cx f = a(r, col) * inv;
            if (f == cx(0.0)) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(r, j) -= f * b(col, j);
        }
    }
    CMat x(n, b.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) x(i, j) = b(i, j) / a(i, i);
    return x;
}

inline cvec solve(const CMat& a, const cvec& rhs) {
    CMat b(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
    CMat x = solve(a, b);
    cvec out(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
    return out;
}

inline CMat inverse(const CMat& a) { return solve(a, CMat::identity(a.rows())); }

// Crude condition estimate in the infinity norm; enough for the
// special-divisor guard.
inline double cond_inf(const CMat& a) {
    CMat ai = inverse(a);
    return a.norm_inf() * ai.norm_inf();
}

// Real symmetric matrix stored densely; Jacobi rotations.  Used for
// positive-definiteness of Im tau and the theta cutoff ellipsoid.
inline std::vector<double> sym_eigenvalues(std::vector<double> m, std::size_t n) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += sq(m[i * n + j]);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = m[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                double app = m[p * n + p], aqq = m[q * n + q];
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double mkp = m[k * n + p], mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double mpk = m[p * n + k], mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = m[i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Real linear solve (Gaussian elimination, partial pivoting) for the
// 2g x 2g lattice-coordinate systems.
inline std::vector<double> solve_real(std::vector<double> a, std::vector<double> b,
                                      std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > best) {
                best = std::abs(a[r * n + col]);
                piv = r;
            }
        if (best == 0.0) throw Error("solve_real: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
            std::swap(b[col], b[piv]);
        }
        double inv = 1.0 / a[col * n + col];
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i * n + i];
    return x;
}

} // namespace loopsoliton

#endif
