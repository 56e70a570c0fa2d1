#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "teleprobe/error.hpp"
#include "teleprobe/stats/descriptive.hpp"
#include "teleprobe/stats/special.hpp"

namespace teleprobe::stats {

struct WelchResult {
    double t = 0.0;
    double dof = 0.0;  // Welch-Satterthwaite
    double p = 1.0;    // two-sided
};

/// Welch's unequal-variance two-sample t-test.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw stats_error("welch t-test needs at least two values per sample");
    }
    const double va = sample_variance(a);
    const double vb = sample_variance(b);
    if (va == 0.0 || vb == 0.0) {
        throw stats_error("welch t-test undefined for a sample with zero variance");
    }
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const double sa = va / na;
    const double sb = vb / nb;
    WelchResult r;
    r.t = (mean(a) - mean(b)) / std::sqrt(sa + sb);
    r.dof = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    r.p = student_t_two_sided_p(r.t, r.dof);
    return r;
}

inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    return welch_t_test(std::span<const double>(a), std::span<const double>(b));
}

} // namespace teleprobe::stats
