#include "symq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "symq/error.hpp"

namespace symq {

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const auto na = static_cast<double>(count_);
    const auto nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;

    const double m2 = m2_ + other.m2_ + delta * delta * na * nb / n;
    const double m3 = m3_ + other.m3_ +
                      delta * delta * delta * na * nb * (na - nb) / (n * n) +
                      3.0 * delta * (na * other.m2_ - nb * m2_) / n;

    mean_ += delta * nb / n;
    m2_ = m2;
    m3_ = m3;
    count_ += other.count_;
}

double MomentAccumulator::variance() const {
    if (count_ == 0) return 0.0;
    return m2_ / static_cast<double>(count_);
}

double MomentAccumulator::third_central_moment() const {
    if (count_ == 0) return 0.0;
    return m3_ / static_cast<double>(count_);
}

double MomentAccumulator::skewness() const {
    if (count_ < 3) throw DegenerateSampleError("skewness: need at least 3 samples");
    const double var = variance();
    if (!(var > 0.0)) throw DegenerateSampleError("skewness: zero variance");
    return third_central_moment() / (var * std::sqrt(var));
}

double skewness(std::span<const double> samples) {
    MomentAccumulator acc;
    for (double x : samples) acc.push(x);
    return acc.skewness();
}

namespace {

// Max ECDF gap tracked in integer counts so that ties and mirror sets are
// exact: |ia/na - ib/nb| = |ia*nb - ib*na| / (na*nb).
double ks_sorted(const std::vector<double>& a, const std::vector<double>& b) {
    const auto na = static_cast<int64_t>(a.size());
    const auto nb = static_cast<int64_t>(b.size());
    int64_t ia = 0;
    int64_t ib = 0;
    int64_t max_num = 0;
    while (ia < na && ib < nb) {
        const double va = a[static_cast<size_t>(ia)];
        const double vb = b[static_cast<size_t>(ib)];
        const double v = std::min(va, vb);
        while (ia < na && a[static_cast<size_t>(ia)] == v) ++ia;
        while (ib < nb && b[static_cast<size_t>(ib)] == v) ++ib;
        max_num = std::max(max_num, std::abs(ia * nb - ib * na));
    }
    // Remaining tail of one sample only shrinks the gap back to 0.
    return static_cast<double>(max_num) /
           (static_cast<double>(na) * static_cast<double>(nb));
}

} // namespace

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw DegenerateSampleError("ks_two_sample: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return ks_sorted(sa, sb);
}

double symmetry_statistic(std::span<const double> samples) {
    if (samples.size() < 100)
        throw DegenerateSampleError("symmetry_statistic: need at least 100 samples");
    std::vector<double> neg(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) neg[i] = -samples[i];
    return ks_two_sample(samples, neg);
}

} // namespace symq
