// Binary code matrix: m code bits by n samples, entries constrained to
// +1/-1 and stored as int8. Kept separate from DenseMatrix so the
// discrete update steps cannot silently produce fractional entries.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "matrix.hpp"
#include "rng.hpp"

namespace xmh {

struct CodeMatrix {
    std::size_t m = 0; // code length (rows)
    std::size_t n = 0; // number of samples (columns)
    std::vector<std::int8_t> bits; // row-major, values in {-1, +1}

    CodeMatrix() = default;
    CodeMatrix(std::size_t m_, std::size_t n_) : m(m_), n(n_), bits(m_ * n_, 1) {}

    std::int8_t& at(std::size_t k, std::size_t i) { return bits[k * n + i]; }
    std::int8_t at(std::size_t k, std::size_t i) const { return bits[k * n + i]; }

    static CodeMatrix random(std::size_t m, std::size_t n, Rng& rng) {
        CodeMatrix c(m, n);
        for (auto& b : c.bits) b = static_cast<std::int8_t>(rng.rademacher());
        return c;
    }

    // ties (exact zeros) map to +1
    static CodeMatrix from_dense(const DenseMatrix& a) {
        CodeMatrix c(a.rows(), a.cols());
        for (std::size_t k = 0; k < a.rows(); ++k)
            for (std::size_t i = 0; i < a.cols(); ++i)
                c.at(k, i) = static_cast<std::int8_t>(a(k, i) >= 0.0 ? 1 : -1);
        return c;
    }

    DenseMatrix to_dense() const {
        DenseMatrix d(m, n);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < n; ++i) d(k, i) = static_cast<double>(at(k, i));
        return d;
    }

    bool operator==(const CodeMatrix& o) const { return m == o.m && n == o.n && bits == o.bits; }
};

} // namespace xmh
