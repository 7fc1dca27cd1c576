#include "symq/kernels.hpp"

#include <cmath>

#include "symq/error.hpp"

namespace symq::kernels {

namespace {

// Shared inner routines keep the accumulation order identical between the
// serial reference and the OpenMP versions.

double dot(const double* __restrict a, const double* __restrict b, int n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

void axpy(double c, const double* __restrict x, double* __restrict y, int n) {
    for (int i = 0; i < n; ++i) y[i] += c * x[i];
}

void forward_row(const Matrix& x, const Matrix& w, std::span<const double> b,
                 Matrix& z, int n) {
    const double* xn = x.row(n);
    double* zn = z.row(n);
    for (int o = 0; o < w.rows; ++o) zn[o] = b[static_cast<size_t>(o)] + dot(xn, w.row(o), w.cols);
}

void grad_weights_row(const Matrix& dz, const Matrix& x, Matrix& dw, int o) {
    double* dwo = dw.row(o);
    for (int i = 0; i < dw.cols; ++i) dwo[i] = 0.0;
    for (int n = 0; n < x.rows; ++n) axpy(dz.at(n, o), x.row(n), dwo, dw.cols);
}

void grad_input_row(const Matrix& dz, const Matrix& w, Matrix& dx, int n) {
    double* dxn = dx.row(n);
    for (int i = 0; i < dx.cols; ++i) dxn[i] = 0.0;
    for (int o = 0; o < w.rows; ++o) axpy(dz.at(n, o), w.row(o), dxn, w.cols);
}

void gauss_row(std::span<const double> x, std::span<const double> log_coef,
               std::span<const double> half_prec, std::span<const double> center,
               Matrix& r, int n) {
    const auto k_count = static_cast<size_t>(r.cols);
    double* rn = r.row(n);
    double max_log = -HUGE_VAL;
    for (size_t k = 0; k < k_count; ++k) {
        const double d = x[static_cast<size_t>(n)] - center[k];
        rn[k] = log_coef[k] - half_prec[k] * d * d;
        if (rn[k] > max_log) max_log = rn[k];
    }
    double total = 0.0;
    for (size_t k = 0; k < k_count; ++k) {
        rn[k] = std::exp(rn[k] - max_log);
        total += rn[k];
    }
    for (size_t k = 0; k < k_count; ++k) rn[k] /= total;
}

void check_linear(const Matrix& x, const Matrix& w, size_t b, const Matrix& z) {
    if (x.cols != w.cols || z.rows != x.rows || z.cols != w.rows ||
        b != static_cast<size_t>(w.rows))
        throw ShapeError("linear kernel: inconsistent shapes");
}

} // namespace

void linear_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& z) {
    check_linear(x, w, b.size(), z);
#pragma omp parallel for schedule(static)
    for (int n = 0; n < x.rows; ++n) forward_row(x, w, b, z, n);
}

void linear_grad_weights(const Matrix& dz, const Matrix& x, Matrix& dw) {
    check_linear(x, dw, static_cast<size_t>(dw.rows), dz);
#pragma omp parallel for schedule(static)
    for (int o = 0; o < dw.rows; ++o) grad_weights_row(dz, x, dw, o);
}

void linear_grad_bias(const Matrix& dz, std::span<double> db) {
    if (db.size() != static_cast<size_t>(dz.cols))
        throw ShapeError("linear_grad_bias: inconsistent shapes");
#pragma omp parallel for schedule(static)
    for (int o = 0; o < dz.cols; ++o) {
        double s = 0.0;
        for (int n = 0; n < dz.rows; ++n) s += dz.at(n, o);
        db[static_cast<size_t>(o)] = s;
    }
}

void linear_grad_input(const Matrix& dz, const Matrix& w, Matrix& dx) {
    check_linear(dx, w, static_cast<size_t>(w.rows), dz);
#pragma omp parallel for schedule(static)
    for (int n = 0; n < dz.rows; ++n) grad_input_row(dz, w, dx, n);
}

void relu_forward(const Matrix& z, Matrix& a) {
    if (!z.same_shape(a)) throw ShapeError("relu_forward: shape mismatch");
    const auto total = static_cast<int64_t>(z.v.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < total; ++i)
        a.v[static_cast<size_t>(i)] = z.v[static_cast<size_t>(i)] > 0.0 ? z.v[static_cast<size_t>(i)] : 0.0;
}

void relu_backward(const Matrix& z_pre, Matrix& da) {
    if (!z_pre.same_shape(da)) throw ShapeError("relu_backward: shape mismatch");
    const auto total = static_cast<int64_t>(da.v.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < total; ++i)
        if (!(z_pre.v[static_cast<size_t>(i)] > 0.0)) da.v[static_cast<size_t>(i)] = 0.0;
}

void gauss_log_responsibilities(std::span<const double> x,
                                std::span<const double> log_coef,
                                std::span<const double> half_prec,
                                std::span<const double> center, Matrix& r) {
    if (r.rows != static_cast<int>(x.size()) || log_coef.size() != half_prec.size() ||
        log_coef.size() != center.size() || r.cols != static_cast<int>(log_coef.size()))
        throw ShapeError("gauss_log_responsibilities: inconsistent shapes");
#pragma omp parallel for schedule(static)
    for (int n = 0; n < r.rows; ++n) gauss_row(x, log_coef, half_prec, center, r, n);
}

namespace ref {

void linear_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& z) {
    check_linear(x, w, b.size(), z);
    for (int n = 0; n < x.rows; ++n) forward_row(x, w, b, z, n);
}

void linear_grad_weights(const Matrix& dz, const Matrix& x, Matrix& dw) {
    check_linear(x, dw, static_cast<size_t>(dw.rows), dz);
    for (int o = 0; o < dw.rows; ++o) grad_weights_row(dz, x, dw, o);
}

void linear_grad_bias(const Matrix& dz, std::span<double> db) {
    if (db.size() != static_cast<size_t>(dz.cols))
        throw ShapeError("linear_grad_bias: inconsistent shapes");
    for (int o = 0; o < dz.cols; ++o) {
        double s = 0.0;
        for (int n = 0; n < dz.rows; ++n) s += dz.at(n, o);
        db[static_cast<size_t>(o)] = s;
    }
}

void linear_grad_input(const Matrix& dz, const Matrix& w, Matrix& dx) {
    check_linear(dx, w, static_cast<size_t>(w.rows), dz);
    for (int n = 0; n < dz.rows; ++n) grad_input_row(dz, w, dx, n);
}

void relu_forward(const Matrix& z, Matrix& a) {
    if (!z.same_shape(a)) throw ShapeError("relu_forward: shape mismatch");
    for (size_t i = 0; i < z.v.size(); ++i) a.v[i] = z.v[i] > 0.0 ? z.v[i] : 0.0;
}

void relu_backward(const Matrix& z_pre, Matrix& da) {
    if (!z_pre.same_shape(da)) throw ShapeError("relu_backward: shape mismatch");
    for (size_t i = 0; i < da.v.size(); ++i)
        if (!(z_pre.v[i] > 0.0)) da.v[i] = 0.0;
}

void gauss_log_responsibilities(std::span<const double> x,
                                std::span<const double> log_coef,
                                std::span<const double> half_prec,
                                std::span<const double> center, Matrix& r) {
    if (r.rows != static_cast<int>(x.size()) || log_coef.size() != half_prec.size() ||
        log_coef.size() != center.size() || r.cols != static_cast<int>(log_coef.size()))
        throw ShapeError("gauss_log_responsibilities: inconsistent shapes");
    for (int n = 0; n < r.rows; ++n) gauss_row(x, log_coef, half_prec, center, r, n);
}

} // namespace ref

} // namespace symq::kernels
