#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace symq {

// Streaming central moments up to order three (one-pass Welford/Pebay
// recurrences). Lets skewness be snapshotted during training without
// storing every error.
class MomentAccumulator {
  public:
    void push(double x) {
        const auto n1 = static_cast<double>(count_);
        ++count_;
        const auto n = static_cast<double>(count_);
        const double delta = x - mean_;
        const double delta_n = delta / n;
        const double term1 = delta * delta_n * n1;
        m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
        m2_ += term1;
        mean_ += delta_n;
    }

    // Merging two accumulators matches accumulating the concatenated data.
    void merge(const MomentAccumulator& other);

    int64_t count() const { return count_; }
    double mean() const { return mean_; }
    double m2() const { return m2_; }
    double m3() const { return m3_; }

    // Population variance m2/n.
    double variance() const;
    // Third central moment m3/n.
    double third_central_moment() const;
    // mu3 / sigma^3. Requires count >= 3 and positive variance.
    double skewness() const;

  private:
    int64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
};

// Skewness mu3/sigma^3 of a sample from its central moments.
// Requires >= 3 samples with positive variance; throws DegenerateSampleError.
double skewness(std::span<const double> samples);

// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
// Ties are handled exactly; identical multisets give exactly 0.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// KS statistic between a sample and its negation; 0 means the empirical
// distribution is perfectly symmetric about 0. Requires >= 100 samples.
double symmetry_statistic(std::span<const double> samples);

} // namespace symq
