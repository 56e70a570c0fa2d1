#pragma once

#include <cmath>
#include <limits>

#include "teleprobe/error.hpp"

namespace teleprobe::stats {

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz.
inline double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 1000;
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    return h;
}

} // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0) || !(x <= 1.0)) {
        throw stats_error("incomplete beta argument out of domain");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_cf(a, b, x) / a;
    }
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) throw stats_error("degrees of freedom must be positive");
    if (t == 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

/// Student's t CDF.
inline double student_t_cdf(double t, double dof) {
    const double tail = 0.5 * student_t_two_sided_p(t, dof);
    return t >= 0.0 ? 1.0 - tail : tail;
}

} // namespace teleprobe::stats
