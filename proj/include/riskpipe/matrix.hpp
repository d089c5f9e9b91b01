#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace riskpipe {

/// Dense row-major matrix of doubles. Small on purpose: the learners only
/// need element access, row spans and a few helpers.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }
    double* row_ptr(std::size_t r) { return data.data() + r * cols; }

    std::vector<double> row(std::size_t r) const {
        return std::vector<double>(row_ptr(r), row_ptr(r) + cols);
    }

    bool empty() const { return rows == 0 || cols == 0; }
};

inline Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), m.cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t c = 0; c < m.cols; ++c) out(i, c) = m(idx[i], c);
    return out;
}

inline Matrix select_cols(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(m.rows, idx.size());
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t j = 0; j < idx.size(); ++j) out(r, j) = m(r, idx[j]);
    return out;
}

template <typename T>
std::vector<T> select_idx(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

inline double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double euclidean_distance(const double* a, const double* b, std::size_t n) {
    return std::sqrt(squared_distance(a, b, n));
}

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Throws std::runtime_error when the system is singular to working
/// precision (pivot below 1e-12 of the largest row scale).
inline std::vector<double> solve_linear_system(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw std::runtime_error("solve_linear_system: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
        if (std::fabs(a(pivot, col)) < 1e-12)
            throw std::runtime_error("solve_linear_system: singular matrix");
        if (pivot != col) {
            for (std::size_t c = col; c < n; ++c) std::swap(a(col, c), a(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
        x[i] = s / a(i, i);
    }
    return x;
}

}  // namespace riskpipe
