#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <omp.h>

#include "doctest.h"
#include "symq/error.hpp"
#include "symq/kernels.hpp"
#include "symq/rng.hpp"
#include "symq/special.hpp"
#include "symq/stats.hpp"

using namespace symq;

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kZeta3 = 1.20205690315959428540;

// Naive single-threaded oracles for the batched kernels, written directly
// from the index formulas.
Matrix naive_linear_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix z(x.rows, w.rows);
    for (int n = 0; n < x.rows; ++n)
        for (int o = 0; o < w.rows; ++o) {
            double s = b[static_cast<size_t>(o)];
            for (int i = 0; i < w.cols; ++i) s += x.at(n, i) * w.at(o, i);
            z.at(n, o) = s;
        }
    return z;
}

Matrix naive_grad_weights(const Matrix& dz, const Matrix& x) {
    Matrix dw(dz.cols, x.cols);
    for (int o = 0; o < dz.cols; ++o)
        for (int i = 0; i < x.cols; ++i) {
            double s = 0.0;
            for (int n = 0; n < x.rows; ++n) s += dz.at(n, o) * x.at(n, i);
            dw.at(o, i) = s;
        }
    return dw;
}

Matrix naive_grad_input(const Matrix& dz, const Matrix& w) {
    Matrix dx(dz.rows, w.cols);
    for (int n = 0; n < dz.rows; ++n)
        for (int i = 0; i < w.cols; ++i) {
            double s = 0.0;
            for (int o = 0; o < dz.cols; ++o) s += dz.at(n, o) * w.at(o, i);
            dx.at(n, i) = s;
        }
    return dx;
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.v) x = rng.uniform(-2.0, 2.0);
    return m;
}

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-30, std::abs(want));
}

} // namespace

TEST_CASE("digamma matches analytic anchor points") {
    CHECK(std::abs(digamma(1.0) - (-kEulerGamma)) <= 1e-10);
    CHECK(std::abs(digamma(2.0) - (1.0 - kEulerGamma)) <= 1e-10);
    // psi(1/2) = -gamma - 2 ln 2
    CHECK(std::abs(digamma(0.5) - (-kEulerGamma - 2.0 * std::numbers::ln2)) <= 1e-10);
}

TEST_CASE("digamma parameter-free identities") {
    // Reflection: psi(1-x) - psi(x) = pi * cot(pi x); at x = 1/4 the rhs is pi.
    CHECK(std::abs(digamma(0.75) - digamma(0.25) - std::numbers::pi) <= 1e-10);
    // Duplication: psi(2x) = (psi(x) + psi(x + 1/2)) / 2 + ln 2.
    for (double x : {0.3, 1.0, 2.7, 11.0, 40.0}) {
        const double lhs = digamma(2.0 * x);
        const double rhs = 0.5 * (digamma(x) + digamma(x + 0.5)) + std::numbers::ln2;
        CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
}

TEST_CASE("digamma matches an independent library implementation") {
    for (double x = 1e-3; x <= 500.0; x *= 1.31)
        CHECK(std::abs(digamma(x) - boost::math::digamma(x)) <= 1e-10);
}

TEST_CASE("digamma recurrence psi(x+1) - psi(x) = 1/x") {
    for (double x = 0.1; x <= 100.0; x *= 1.17)
        CHECK(std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) <= 1e-10);
}

TEST_CASE("digamma rejects non-positive arguments") {
    CHECK_THROWS_AS(digamma(0.0), DomainError);
    CHECK_THROWS_AS(digamma(-3.5), DomainError);
}

TEST_CASE("rng reproducibility under seed") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(12345), d(54321);
    bool same = true;
    for (int i = 0; i < 16; ++i) same = same && c.next_u64() == d.next_u64();
    CHECK(!same);
}

TEST_CASE("rng derived streams are independent sequences") {
    Rng env = Rng::derive(7, stream::kEnv);
    Rng pol = Rng::derive(7, stream::kPolicy);
    bool same = true;
    for (int i = 0; i < 16; ++i) same = same && env.next_u64() == pol.next_u64();
    CHECK(!same);
    Rng env1 = Rng::derive(7, stream::kEnv);
    Rng env2 = Rng::derive(7, stream::kEnv);
    for (int i = 0; i < 100; ++i) CHECK(env1.next_u64() == env2.next_u64());
}

TEST_CASE("rng uniform ranges and moments") {
    Rng rng(99);
    MomentAccumulator acc;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        acc.push(u);
    }
    CHECK(std::abs(acc.mean() - 0.5) < 0.005);
    CHECK(std::abs(acc.variance() - 1.0 / 12.0) < 0.002);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-3.0, 5.0);
        CHECK(u >= -3.0);
        CHECK(u < 5.0);
    }
}

TEST_CASE("rng normal moments") {
    Rng rng(4242);
    MomentAccumulator acc;
    const int n = 200000;
    for (int i = 0; i < n; ++i) acc.push(rng.normal());
    CHECK(std::abs(acc.mean()) < 0.01);
    CHECK(std::abs(acc.variance() - 1.0) < 0.02);
    CHECK(std::abs(acc.skewness()) < 0.03);
}

TEST_CASE("rng uniform_int is unbiased across buckets") {
    Rng rng(5);
    const uint64_t k = 8;
    const int n = 160000;
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) ++counts[rng.uniform_int(k)];
    const double expect = static_cast<double>(n) / static_cast<double>(k);
    const double sigma = std::sqrt(expect * (1.0 - 1.0 / static_cast<double>(k)));
    for (uint64_t b = 0; b < k; ++b)
        CHECK(std::abs(counts[b] - expect) < 4.5 * sigma);
    CHECK_THROWS_AS(rng.uniform_int(0), DomainError);
}

TEST_CASE("rng categorical follows the weights") {
    Rng rng(17);
    const std::vector<double> w{1.0, 2.0, 7.0};
    const int n = 100000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i) ++counts[rng.categorical(w)];
    for (size_t k = 0; k < 3; ++k) {
        const double p = w[k] / 10.0;
        const double sigma = std::sqrt(n * p * (1.0 - p));
        CHECK(std::abs(counts[k] - n * p) < 4.5 * sigma);
    }
    const std::vector<double> bad{0.0, 0.0};
    CHECK_THROWS_AS(rng.categorical(bad), DomainError);
}

TEST_CASE("rng sample_indices draws uniform distinct subsets") {
    Rng rng(31);
    const int n = 10, m = 4, trials = 50000;
    std::vector<int> hits(n, 0);
    for (int t = 0; t < trials; ++t) {
        auto idx = rng.sample_indices(n, m);
        CHECK(static_cast<int>(idx.size()) == m);
        std::sort(idx.begin(), idx.end());
        CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
        for (int i : idx) {
            CHECK(i >= 0);
            CHECK(i < n);
            ++hits[static_cast<size_t>(i)];
        }
    }
    const double p = static_cast<double>(m) / n;
    const double sigma = std::sqrt(trials * p * (1.0 - p));
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(hits[static_cast<size_t>(i)] - trials * p) < 4.5 * sigma);
    CHECK_THROWS_AS(rng.sample_indices(3, 4), DomainError);
    CHECK_THROWS_AS(rng.sample_indices(3, 0), DomainError);
}

TEST_CASE("moment accumulator matches two-pass batch formulas") {
    Rng rng(8);
    std::vector<double> xs(10000);
    for (double& x : xs) x = rng.uniform(-1.0, 1.0) + 0.3 * rng.normal();
    MomentAccumulator acc;
    for (double x : xs) acc.push(x);

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double m2 = 0.0, m3 = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    CHECK(rel_err(acc.mean(), mean) <= 1e-9);
    CHECK(rel_err(acc.m2(), m2) <= 1e-9);
    CHECK(rel_err(acc.m3(), m3) <= 1e-7);
    const double n = static_cast<double>(xs.size());
    const double skew_batch = (m3 / n) / std::pow(m2 / n, 1.5);
    CHECK(rel_err(acc.skewness(), skew_batch) <= 1e-9);
}

TEST_CASE("moment accumulator merge equals concatenation") {
    Rng rng(9);
    std::vector<double> xs(5000);
    for (double& x : xs) x = rng.normal(1.5, 2.0);
    MomentAccumulator whole, left, right;
    for (size_t i = 0; i < xs.size(); ++i) {
        whole.push(xs[i]);
        (i < 1700 ? left : right).push(xs[i]);
    }
    left.merge(right);
    CHECK(left.count() == whole.count());
    CHECK(rel_err(left.mean(), whole.mean()) <= 1e-9);
    CHECK(rel_err(left.m2(), whole.m2()) <= 1e-9);
    CHECK(rel_err(left.skewness(), whole.skewness()) <= 1e-9);
}

TEST_CASE("skewness trivial samples") {
    const std::vector<double> sym{-1.0, 0.0, 1.0};
    CHECK(std::abs(skewness(sym)) <= 1e-12);
    const std::vector<double> flat{5.0, 5.0, 5.0};
    CHECK_THROWS_AS(skewness(flat), DegenerateSampleError);
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(skewness(two), DegenerateSampleError);
}

TEST_CASE("skewness of standard Gumbel draws matches the analytic value") {
    // Skewness of the Gumbel law is 12 sqrt(6) zeta(3) / pi^3.
    const double analytic =
        12.0 * std::sqrt(6.0) * kZeta3 / std::pow(std::numbers::pi, 3.0);
    Rng rng(123);
    MomentAccumulator acc;
    for (int i = 0; i < 1000000; ++i) {
        double u = rng.uniform();
        if (u <= 0.0) u = 0x1.0p-53;
        acc.push(-std::log(-std::log(u)));
    }
    CHECK(std::abs(acc.skewness() - analytic) < 0.03);
    CHECK(std::abs(analytic - 1.1395) < 1e-3);
}

TEST_CASE("ks_two_sample hand-worked cases") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{1.5, 2.5};
    CHECK(ks_two_sample(a, b) == 1.0 / 3.0);

    const std::vector<double> at{1.0, 1.0, 2.0};
    const std::vector<double> bt{1.0, 3.0};
    CHECK(ks_two_sample(at, bt) == 0.5);

    CHECK(ks_two_sample(a, a) == 0.0);
    const std::vector<double> lo{0.0, 0.1}, hi{5.0, 6.0, 7.0};
    CHECK(ks_two_sample(lo, hi) == 1.0);
}

TEST_CASE("symmetry_statistic is exactly zero on mirror sets") {
    Rng rng(77);
    std::vector<double> xs;
    for (int i = 0; i < 500; ++i) {
        const double x = rng.normal(0.7, 1.3);
        xs.push_back(x);
        xs.push_back(-x);
    }
    std::shuffle(xs.begin(), xs.end(), std::mt19937_64(3));
    CHECK(symmetry_statistic(xs) == 0.0);
}

TEST_CASE("symmetry_statistic separates symmetric from skewed laws") {
    Rng rng(2024);
    std::vector<double> normal(100000), gumbel(100000);
    for (double& x : normal) x = rng.normal();
    for (double& x : gumbel) {
        double u = rng.uniform();
        if (u <= 0.0) u = 0x1.0p-53;
        x = -std::log(-std::log(u));
    }
    CHECK(symmetry_statistic(normal) < 0.01);
    CHECK(symmetry_statistic(gumbel) > 0.05);
    const std::vector<double> few(99, 0.0);
    CHECK_THROWS_AS(symmetry_statistic(few), DegenerateSampleError);
}

TEST_CASE("linear kernels match naive index-formula oracles") {
    Rng rng(55);
    for (auto [B, in, out] : {std::array<int, 3>{1, 1, 1},
                              std::array<int, 3>{7, 5, 3},
                              std::array<int, 3>{32, 17, 9},
                              std::array<int, 3>{13, 256, 11}}) {
        const Matrix x = random_matrix(B, in, rng);
        const Matrix w = random_matrix(out, in, rng);
        std::vector<double> b(static_cast<size_t>(out));
        for (double& bi : b) bi = rng.uniform(-1.0, 1.0);

        Matrix z(B, out);
        kernels::linear_forward(x, w, b, z);
        const Matrix zo = naive_linear_forward(x, w, b);
        for (size_t i = 0; i < z.v.size(); ++i)
            CHECK(rel_err(z.v[i], zo.v[i]) <= 1e-12);

        const Matrix dz = random_matrix(B, out, rng);
        Matrix dw(out, in);
        kernels::linear_grad_weights(dz, x, dw);
        const Matrix dwo = naive_grad_weights(dz, x);
        for (size_t i = 0; i < dw.v.size(); ++i)
            CHECK(rel_err(dw.v[i], dwo.v[i]) <= 1e-12);

        std::vector<double> db(static_cast<size_t>(out));
        kernels::linear_grad_bias(dz, db);
        for (int o = 0; o < out; ++o) {
            double s = 0.0;
            for (int n = 0; n < B; ++n) s += dz.at(n, o);
            CHECK(rel_err(db[static_cast<size_t>(o)], s) <= 1e-12);
        }

        Matrix dx(B, in);
        kernels::linear_grad_input(dz, w, dx);
        const Matrix dxo = naive_grad_input(dz, w);
        for (size_t i = 0; i < dx.v.size(); ++i)
            CHECK(rel_err(dx.v[i], dxo.v[i]) <= 1e-12);
    }
}

TEST_CASE("kernel shape validation") {
    Matrix x(2, 3), w(4, 5), z(2, 4);
    std::vector<double> b(4, 0.0);
    CHECK_THROWS_AS(kernels::linear_forward(x, w, b, z), ShapeError);
    Matrix dz(2, 4);
    std::vector<double> db(3, 0.0);
    CHECK_THROWS_AS(kernels::linear_grad_bias(dz, db), ShapeError);
}

TEST_CASE("relu kernels") {
    Matrix z(2, 3);
    z.v = {-1.0, 0.0, 2.5, 3.0, -0.1, 0.7};
    Matrix a(2, 3);
    kernels::relu_forward(z, a);
    CHECK(a.v == std::vector<double>{0.0, 0.0, 2.5, 3.0, 0.0, 0.7});
    Matrix da(2, 3);
    da.fill(1.0);
    kernels::relu_backward(z, da);
    CHECK(da.v == std::vector<double>{0.0, 0.0, 1.0, 1.0, 0.0, 1.0});
}

TEST_CASE("gauss responsibilities normalize and match direct evaluation") {
    Rng rng(66);
    const int N = 41, K = 7;
    std::vector<double> x(N), log_coef(K), half_prec(K), center(K);
    for (double& xi : x) xi = rng.uniform(-5.0, 5.0);
    for (int k = 0; k < K; ++k) {
        log_coef[static_cast<size_t>(k)] = rng.uniform(-300.0, 2.0); // extreme logs stay stable
        half_prec[static_cast<size_t>(k)] = rng.uniform(0.01, 3.0);
        center[static_cast<size_t>(k)] = rng.uniform(-4.0, 4.0);
    }
    Matrix r(N, K);
    kernels::gauss_log_responsibilities(x, log_coef, half_prec, center, r);
    for (int n = 0; n < N; ++n) {
        double row_sum = 0.0;
        double max_log = -1e300;
        std::vector<double> logs(K);
        for (int k = 0; k < K; ++k) {
            const double d = x[static_cast<size_t>(n)] - center[static_cast<size_t>(k)];
            logs[static_cast<size_t>(k)] =
                log_coef[static_cast<size_t>(k)] - half_prec[static_cast<size_t>(k)] * d * d;
            max_log = std::max(max_log, logs[static_cast<size_t>(k)]);
        }
        double denom = 0.0;
        for (int k = 0; k < K; ++k) denom += std::exp(logs[static_cast<size_t>(k)] - max_log);
        for (int k = 0; k < K; ++k) {
            const double want = std::exp(logs[static_cast<size_t>(k)] - max_log) / denom;
            CHECK(std::abs(r.at(n, k) - want) <= 1e-12);
            row_sum += r.at(n, k);
        }
        CHECK(std::abs(row_sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("openmp kernels are bitwise identical to the serial reference") {
    omp_set_num_threads(4);
    Rng rng(2718);
    for (auto [B, in, out] : {std::array<int, 3>{1, 1, 1},
                              std::array<int, 3>{5, 3, 2},
                              std::array<int, 3>{33, 19, 7},
                              std::array<int, 3>{64, 301, 29}}) {
        const Matrix x = random_matrix(B, in, rng);
        const Matrix w = random_matrix(out, in, rng);
        std::vector<double> b(static_cast<size_t>(out));
        for (double& bi : b) bi = rng.uniform(-1.0, 1.0);
        const Matrix dz = random_matrix(B, out, rng);

        Matrix z_omp(B, out), z_ref(B, out);
        kernels::linear_forward(x, w, b, z_omp);
        kernels::ref::linear_forward(x, w, b, z_ref);
        CHECK(z_omp.v == z_ref.v);

        Matrix dw_omp(out, in), dw_ref(out, in);
        kernels::linear_grad_weights(dz, x, dw_omp);
        kernels::ref::linear_grad_weights(dz, x, dw_ref);
        CHECK(dw_omp.v == dw_ref.v);

        std::vector<double> db_omp(static_cast<size_t>(out)), db_ref(static_cast<size_t>(out));
        kernels::linear_grad_bias(dz, db_omp);
        kernels::ref::linear_grad_bias(dz, db_ref);
        CHECK(db_omp == db_ref);

        Matrix dx_omp(B, in), dx_ref(B, in);
        kernels::linear_grad_input(dz, w, dx_omp);
        kernels::ref::linear_grad_input(dz, w, dx_ref);
        CHECK(dx_omp.v == dx_ref.v);

        Matrix a_omp(B, in), a_ref(B, in);
        kernels::relu_forward(x, a_omp);
        kernels::ref::relu_forward(x, a_ref);
        CHECK(a_omp.v == a_ref.v);
    }

    const int N = 137, K = 10;
    std::vector<double> xs(N), log_coef(K), half_prec(K), center(K);
    for (double& xi : xs) xi = rng.normal();
    for (int k = 0; k < K; ++k) {
        log_coef[static_cast<size_t>(k)] = rng.uniform(-3.0, 1.0);
        half_prec[static_cast<size_t>(k)] = rng.uniform(0.1, 2.0);
        center[static_cast<size_t>(k)] = rng.normal();
    }
    Matrix r_omp(N, K), r_ref(N, K);
    kernels::gauss_log_responsibilities(xs, log_coef, half_prec, center, r_omp);
    kernels::ref::gauss_log_responsibilities(xs, log_coef, half_prec, center, r_ref);
    CHECK(r_omp.v == r_ref.v);
}
