// Small dense-matrix toolkit: row-major double storage, products,
// Frobenius norms, elementwise sign and an SPD solver with explicit
// failure semantics. Everything the optimizer touches runs through here.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace xmh {

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

namespace detail {

inline std::string shape_str(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace detail

// c = a * b, ikj loop order so the inner loop is contiguous in both b and c
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimensions disagree, " + detail::shape_str(a) +
                                    " * " + detail::shape_str(b));
    }
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        double* crow = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// elementwise sign with sign(0) = +1
inline DenseMatrix sign_matrix(const DenseMatrix& a) {
    DenseMatrix s(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = (a(i, j) >= 0.0) ? 1.0 : -1.0;
    return s;
}

inline double frob_sq(const DenseMatrix& a) {
    double s = 0.0;
    const double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) s += p[i] * p[i];
    return s;
}

inline double frob_sq_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("frob_sq_diff: shapes disagree, " + detail::shape_str(a) +
                                    " vs " + detail::shape_str(b));
    }
    double s = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = pa[i] - pb[i];
        s += d * d;
    }
    return s;
}

namespace detail {

// in-place lower Cholesky of an SPD matrix; throws when a pivot falls
// below n*eps*max_diag (covers indefinite, rank-deficient and NaN input)
inline void cholesky_lower(DenseMatrix& m) {
    const std::size_t n = m.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(m(i, i)));
    const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
        if (!(d > tol)) {
            throw std::runtime_error(
                "solve_spsd: matrix is not positive definite at pivot " + std::to_string(j) +
                "; increase the ridge term");
        }
        double ljj = std::sqrt(d);
        m(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
            m(i, j) = s / ljj;
        }
    }
}

} // namespace detail

// Solves X * (A + ridge*I) = B for X, where A is symmetric positive
// (semi)definite of shape m x m and B is p x m. Uses a Cholesky
// factorization of the regularized A; since A is symmetric the row
// system x_i * M = b_i is M^T x_i^T = M x_i^T = b_i^T.
inline DenseMatrix solve_spsd(const DenseMatrix& a, const DenseMatrix& b, double ridge = 0.0) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("solve_spsd: system matrix must be square, got " +
                                    detail::shape_str(a));
    }
    if (b.cols() != a.rows()) {
        throw std::invalid_argument("solve_spsd: right-hand side " + detail::shape_str(b) +
                                    " does not match system " + detail::shape_str(a));
    }
    const std::size_t n = a.rows();
    DenseMatrix l = a;
    for (std::size_t i = 0; i < n; ++i) l(i, i) += ridge;
    detail::cholesky_lower(l);

    DenseMatrix x(b.rows(), b.cols());
    std::vector<double> y(n);
    for (std::size_t r = 0; r < b.rows(); ++r) {
        // forward: L y = b_r^T
        for (std::size_t i = 0; i < n; ++i) {
            double s = b(r, i);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i);
        }
        // backward: L^T x = y
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x(r, k);
            x(r, ii) = s / l(ii, ii);
        }
    }
    return x;
}

// Tries the exact solve first and falls back to a small trace-scaled
// ridge when the system is numerically singular.
inline DenseMatrix solve_spsd_auto(const DenseMatrix& a, const DenseMatrix& b) {
    try {
        return solve_spsd(a, b, 0.0);
    } catch (const std::runtime_error&) {
        double trace = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) trace += a(i, i);
        double ridge = 1e-8 * trace / static_cast<double>(a.rows() ? a.rows() : 1);
        if (ridge <= 0.0) ridge = 1e-8;
        return solve_spsd(a, b, ridge);
    }
}

} // namespace xmh
