// Times the OpenMP kernels against the serial reference and checks that the
// outputs stay bitwise identical while doing so.
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include <omp.h>

#include "symq/kernels.hpp"
#include "symq/rng.hpp"

using namespace symq;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn(); // warm
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.v) x = rng.normal();
    return m;
}

} // namespace

int main() {
    Rng rng(1);
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-22s %10s %10s %8s %s\n", "kernel", "serial ms", "omp ms", "speedup", "bitwise");

    struct Shape { int batch, in, out; };
    for (const auto& [B, in, out] : {Shape{256, 256, 256}, Shape{1024, 256, 256}, Shape{256, 17, 256}}) {
        const Matrix x = random_matrix(B, in, rng);
        const Matrix w = random_matrix(out, in, rng);
        std::vector<double> b(static_cast<size_t>(out), 0.1);
        const Matrix dz = random_matrix(B, out, rng);
        Matrix z1(B, out), z2(B, out), dw1(out, in), dw2(out, in), dx1(B, in), dx2(B, in);

        const int reps = 20;
        char label[64];

        std::snprintf(label, sizeof label, "forward %dx%dx%d", B, in, out);
        const double f_ref = time_ms([&] { kernels::ref::linear_forward(x, w, b, z1); }, reps);
        const double f_omp = time_ms([&] { kernels::linear_forward(x, w, b, z2); }, reps);
        std::printf("%-22s %10.3f %10.3f %7.2fx %s\n", label, f_ref, f_omp, f_ref / f_omp,
                    z1.v == z2.v ? "yes" : "NO");

        std::snprintf(label, sizeof label, "grad_weights %dx%dx%d", B, in, out);
        const double gw_ref = time_ms([&] { kernels::ref::linear_grad_weights(dz, x, dw1); }, reps);
        const double gw_omp = time_ms([&] { kernels::linear_grad_weights(dz, x, dw2); }, reps);
        std::printf("%-22s %10.3f %10.3f %7.2fx %s\n", label, gw_ref, gw_omp, gw_ref / gw_omp,
                    dw1.v == dw2.v ? "yes" : "NO");

        std::snprintf(label, sizeof label, "grad_input %dx%dx%d", B, in, out);
        const double gi_ref = time_ms([&] { kernels::ref::linear_grad_input(dz, w, dx1); }, reps);
        const double gi_omp = time_ms([&] { kernels::linear_grad_input(dz, w, dx2); }, reps);
        std::printf("%-22s %10.3f %10.3f %7.2fx %s\n", label, gi_ref, gi_omp, gi_ref / gi_omp,
                    dx1.v == dx2.v ? "yes" : "NO");
    }

    {
        const int N = 4096, K = 10;
        std::vector<double> xs(N), log_coef(K, -1.0), half_prec(K, 0.7), center(K);
        for (double& v : xs) v = rng.normal();
        for (int k = 0; k < K; ++k) center[static_cast<size_t>(k)] = rng.normal();
        Matrix r1(N, K), r2(N, K);
        const double e_ref = time_ms(
            [&] { kernels::ref::gauss_log_responsibilities(xs, log_coef, half_prec, center, r1); }, 50);
        const double e_omp = time_ms(
            [&] { kernels::gauss_log_responsibilities(xs, log_coef, half_prec, center, r2); }, 50);
        std::printf("%-22s %10.3f %10.3f %7.2fx %s\n", "responsibilities 4096", e_ref, e_omp,
                    e_ref / e_omp, r1.v == r2.v ? "yes" : "NO");
    }
    return 0;
}
