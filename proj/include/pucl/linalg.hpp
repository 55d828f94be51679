#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pucl/errors.hpp"

namespace pucl {

using Vec = std::vector<double>;

// Dense row-major matrix. Small and unblocked on purpose: every consumer in
// this codebase works at d <= a few hundred.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

inline double dot(const Vec& x, const Vec& y) {
    require(x.size() == y.size(), "dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// out = M x
inline Vec matvec(const Matrix& m, const Vec& x) {
    require(x.size() == m.cols, "matvec: dimension mismatch");
    Vec out(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        const double* row = &m.a[i * m.cols];
        for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * x[j];
        out[i] = s;
    }
    return out;
}

// out = M^T x
inline Vec matvec_t(const Matrix& m, const Vec& x) {
    require(x.size() == m.rows, "matvec_t: dimension mismatch");
    Vec out(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = &m.a[i * m.cols];
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j] * x[i];
    }
    return out;
}

inline bool all_finite(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace pucl
