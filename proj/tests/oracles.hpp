// Independent reference implementations the tests compare against.
// Deliberately written with different algorithms and loop orders than
// the library: textbook jki matmul, Gauss-Jordan instead of Cholesky,
// per-bit distance loops, full stable sorts. Slow and simple on purpose.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <xmh/codes.hpp>
#include <xmh/matrix.hpp>

namespace oracle {

inline xmh::DenseMatrix naive_matmul(const xmh::DenseMatrix& a, const xmh::DenseMatrix& b) {
    xmh::DenseMatrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t k = 0; k < a.cols(); ++k)
            for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * b(k, j);
    return c;
}

inline xmh::DenseMatrix naive_transpose(const xmh::DenseMatrix& a) {
    xmh::DenseMatrix t(a.cols(), a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
    return t;
}

inline double naive_frob_sq_diff(const xmh::DenseMatrix& a, const xmh::DenseMatrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double d = a(i, j) - b(i, j);
            s += d * d;
        }
    return s;
}

// Gauss-Jordan with partial pivoting on the augmented system; solves
// A X = B for square A
inline xmh::DenseMatrix gauss_jordan_solve(xmh::DenseMatrix a, xmh::DenseMatrix b) {
    const std::size_t n = a.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) throw std::runtime_error("gauss_jordan_solve: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(piv, j));
        }
        double inv = 1.0 / a(col, col);
        for (std::size_t j = 0; j < n; ++j) a(col, j) *= inv;
        for (std::size_t j = 0; j < b.cols(); ++j) b(col, j) *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(r, j) -= f * b(col, j);
        }
    }
    return b;
}

// least-squares dictionary: minimizes ||phiI - D BI||^2 + ||phiS - D BS||^2
// through the normal equations D (BI BI^T + BS BS^T) = phiI BI^T + phiS BS^T,
// solved by Gauss-Jordan on the transposed system
inline xmh::DenseMatrix least_squares_dictionary(const xmh::CodeMatrix& bi,
                                                 const xmh::CodeMatrix& bs,
                                                 const xmh::DenseMatrix& phi_i,
                                                 const xmh::DenseMatrix& phi_s) {
    xmh::DenseMatrix bi_d = bi.to_dense();
    xmh::DenseMatrix bs_d = bs.to_dense();
    xmh::DenseMatrix g = naive_matmul(bi_d, naive_transpose(bi_d));
    xmh::DenseMatrix g2 = naive_matmul(bs_d, naive_transpose(bs_d));
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += g2(i, j);
    xmh::DenseMatrix p = naive_matmul(phi_i, naive_transpose(bi_d));
    xmh::DenseMatrix p2 = naive_matmul(phi_s, naive_transpose(bs_d));
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j) p(i, j) += p2(i, j);
    // D G = P  <=>  G D^T = P^T (G symmetric)
    return naive_transpose(gauss_jordan_solve(g, naive_transpose(p)));
}

// full objective value from scratch with naive products:
// ||m W - BI^T BS||^2 + lambda (||phiI - D BI||^2 + ||phiS - D BS||^2)
//                    + gamma (||F1 - BI||^2 + ||F2 - BS||^2)
inline double naive_objective(const xmh::CodeMatrix& bi, const xmh::CodeMatrix& bs,
                              const xmh::DenseMatrix& d_mat, const xmh::DenseMatrix& phi_i,
                              const xmh::DenseMatrix& phi_s, const xmh::DenseMatrix& w,
                              const xmh::DenseMatrix& f1, const xmh::DenseMatrix& f2,
                              double lambda, double gamma) {
    const double m = static_cast<double>(bi.m);
    xmh::DenseMatrix bi_d = bi.to_dense();
    xmh::DenseMatrix bs_d = bs.to_dense();
    xmh::DenseMatrix prod = naive_matmul(naive_transpose(bi_d), bs_d);
    double pairwise = 0.0;
    for (std::size_t i = 0; i < prod.rows(); ++i)
        for (std::size_t j = 0; j < prod.cols(); ++j) {
            double diff = m * w(i, j) - prod(i, j);
            pairwise += diff * diff;
        }
    double semantic = naive_frob_sq_diff(phi_i, naive_matmul(d_mat, bi_d)) +
                      naive_frob_sq_diff(phi_s, naive_matmul(d_mat, bs_d));
    double quant = naive_frob_sq_diff(f1, bi_d) + naive_frob_sq_diff(f2, bs_d);
    return pairwise + lambda * semantic + gamma * quant;
}

// per-bit Hamming distance between two code columns
inline std::size_t naive_hamming_cols(const xmh::CodeMatrix& a, std::size_t ca,
                                      const xmh::CodeMatrix& b, std::size_t cb) {
    std::size_t d = 0;
    for (std::size_t k = 0; k < a.m; ++k)
        if (a.at(k, ca) != b.at(k, cb)) ++d;
    return d;
}

struct NaiveHit {
    std::size_t position;
    std::size_t distance;
};

// full sort by (distance, position)
inline std::vector<NaiveHit> naive_topk(const xmh::CodeMatrix& gallery,
                                        const xmh::CodeMatrix& queries, std::size_t q,
                                        std::size_t k) {
    std::vector<NaiveHit> hits(gallery.n);
    for (std::size_t i = 0; i < gallery.n; ++i)
        hits[i] = NaiveHit{i, naive_hamming_cols(gallery, i, queries, q)};
    std::stable_sort(hits.begin(), hits.end(), [](const NaiveHit& a, const NaiveHit& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.position < b.position;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

inline std::vector<std::size_t> naive_radius(const xmh::CodeMatrix& gallery,
                                             const xmh::CodeMatrix& queries, std::size_t q,
                                             std::size_t r) {
    std::vector<std::size_t> within;
    for (std::size_t i = 0; i < gallery.n; ++i)
        if (naive_hamming_cols(gallery, i, queries, q) <= r) within.push_back(i);
    return within;
}

// AP written the cumulative way: walk the ranking, at each relevant item
// take the running hit fraction, divide the sum by the gallery-wide
// relevant count
inline double naive_average_precision(const std::vector<int>& rel, std::size_t total_relevant) {
    if (total_relevant == 0) return 0.0;
    double acc = 0.0;
    double hits = 0.0;
    for (std::size_t i = 0; i < rel.size(); ++i) {
        if (rel[i] == 0) continue;
        hits += 1.0;
        acc += hits / static_cast<double>(i + 1);
    }
    return acc / static_cast<double>(total_relevant);
}

inline double naive_precision_at_k(const std::vector<int>& rel, std::size_t k) {
    std::size_t cut = std::min(k, rel.size());
    if (cut == 0) return 0.0;
    double hits = 0.0;
    for (std::size_t i = 0; i < cut; ++i) hits += rel[i] ? 1.0 : 0.0;
    return hits / static_cast<double>(cut);
}

} // namespace oracle
