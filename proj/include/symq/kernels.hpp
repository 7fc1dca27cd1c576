#pragma once

#include <span>
#include <vector>

#include "symq/matrix.hpp"

// Data-parallel inner kernels of the batched network math and the mixture
// E-step. The OpenMP versions partition work so that every output element is
// accumulated by exactly one thread in a fixed order, which makes them
// bitwise identical to the serial reference for any thread count. kernels::ref
// holds the serial implementations; they are kept for the parity tests and
// the kernel benchmark.
namespace symq::kernels {

// Z = X * W^T + b. X: B x in, W: out x in, b: out, Z: B x out.
void linear_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& z);

// dW[o][i] = sum_n dZ[n][o] * X[n][i].
void linear_grad_weights(const Matrix& dz, const Matrix& x, Matrix& dw);

// db[o] = sum_n dZ[n][o].
void linear_grad_bias(const Matrix& dz, std::span<double> db);

// dX = dZ * W. dZ: B x out, W: out x in, dX: B x in.
void linear_grad_input(const Matrix& dz, const Matrix& w, Matrix& dx);

// A = max(Z, 0) elementwise.
void relu_forward(const Matrix& z, Matrix& a);

// dZ[n][o] = dA[n][o] * (Zpre[n][o] > 0).
void relu_backward(const Matrix& z_pre, Matrix& da);

// Normalized responsibilities of K one-dimensional Gaussian-like components:
// log rho_nk = log_coef[k] - half_prec[k] * (x[n] - center[k])^2, normalized
// per row with log-sum-exp. r: N x K.
void gauss_log_responsibilities(std::span<const double> x,
                                std::span<const double> log_coef,
                                std::span<const double> half_prec,
                                std::span<const double> center, Matrix& r);

namespace ref {
void linear_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& z);
void linear_grad_weights(const Matrix& dz, const Matrix& x, Matrix& dw);
void linear_grad_bias(const Matrix& dz, std::span<double> db);
void linear_grad_input(const Matrix& dz, const Matrix& w, Matrix& dx);
void relu_forward(const Matrix& z, Matrix& a);
void relu_backward(const Matrix& z_pre, Matrix& da);
void gauss_log_responsibilities(std::span<const double> x,
                                std::span<const double> log_coef,
                                std::span<const double> half_prec,
                                std::span<const double> center, Matrix& r);
} // namespace ref

} // namespace symq::kernels
