#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace symq {

// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

    double* row(int r) { return v.data() + static_cast<size_t>(r) * static_cast<size_t>(cols); }
    const double* row(int r) const { return v.data() + static_cast<size_t>(r) * static_cast<size_t>(cols); }

    std::span<const double> row_span(int r) const { return {row(r), static_cast<size_t>(cols)}; }

    double& at(int r, int c) { return v[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)]; }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

} // namespace symq
