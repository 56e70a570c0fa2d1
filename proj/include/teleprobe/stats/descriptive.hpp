#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "teleprobe/error.hpp"

namespace teleprobe::stats {

/// Median of an already sorted, non-empty range.
inline double sorted_median(std::span<const double> xs) {
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

/// Tukey hinges: medians of the lower and upper halves, with the middle value
/// shared by both halves when n is odd.
inline std::pair<double, double> sorted_quartiles(std::span<const double> xs) {
    const std::size_t n = xs.size();
    const std::size_t half = (n + 1) / 2;
    return {sorted_median(xs.first(half)), sorted_median(xs.last(half))};
}

/// n, mean, sample std, median, IQR and coefficient of variation.
///
/// std/iqr need n >= 2 and cov additionally needs mean != 0; asking for an
/// undefined statistic throws stats_error.
class StatsSummary {
public:
    std::size_t n() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double median() const noexcept { return median_; }
    double std() const { return require(std_, "std needs at least two values"); }
    double iqr() const { return require(iqr_, "iqr needs at least two values"); }
    double cov() const { return require(cov_, "cov undefined (n < 2 or mean == 0)"); }

    bool has_std() const noexcept { return std_.has_value(); }
    bool has_cov() const noexcept { return cov_.has_value(); }

private:
    friend StatsSummary descriptive(std::span<const double> values);

    static double require(const std::optional<double>& v, const char* why) {
        if (!v) throw stats_error(why);
        return *v;
    }

    std::size_t n_ = 0;
    double mean_ = 0.0;
    double median_ = 0.0;
    std::optional<double> std_;
    std::optional<double> iqr_;
    std::optional<double> cov_;
};

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw stats_error("mean of empty list");
    // Kahan sum; constant lists come out exact.
    double sum = 0.0, c = 0.0;
    for (double x : xs) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(xs.size());
}

/// Sample variance (n - 1 denominator), two-pass.
inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw stats_error("variance needs at least two values");
    const double m = mean(xs);
    double ss = 0.0, comp = 0.0;
    for (double x : xs) {
        comp += x - m;
        ss += (x - m) * (x - m);
    }
    const auto n = static_cast<double>(xs.size());
    return std::max(0.0, (ss - comp * comp / n) / (n - 1.0));
}

inline StatsSummary descriptive(std::span<const double> values) {
    if (values.empty()) throw stats_error("descriptive statistics of an empty list");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    StatsSummary s;
    s.n_ = sorted.size();
    s.mean_ = mean(values);
    s.median_ = sorted_median(sorted);
    if (sorted.front() == sorted.back()) {
        s.mean_ = sorted.front();
        if (s.n_ >= 2) {
            s.std_ = 0.0;
            s.iqr_ = 0.0;
            if (s.mean_ != 0.0) s.cov_ = 0.0;
        }
        return s;
    }
    if (s.n_ >= 2) {
        s.std_ = std::sqrt(sample_variance(values));
        const auto [q1, q3] = sorted_quartiles(sorted);
        s.iqr_ = q3 - q1;
        if (s.mean_ != 0.0) s.cov_ = *s.std_ / s.mean_;
    }
    return s;
}

inline StatsSummary descriptive(const std::vector<double>& values) { return descriptive(std::span<const double>(values)); }

} // namespace teleprobe::stats
