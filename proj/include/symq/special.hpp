#pragma once

namespace symq {

// Digamma function psi(x) for x > 0. Absolute error <= 1e-10 for x >= 1e-3.
// Throws DomainError for x <= 0.
double digamma(double x);

} // namespace symq
