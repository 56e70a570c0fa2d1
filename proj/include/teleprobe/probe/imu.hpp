#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "teleprobe/probe/probe.hpp"

namespace teleprobe::probe {

struct ImuReading {
    double roll_deg = 0.0;
    double pitch_deg = 0.0;
    double yaw_deg = 0.0;
    std::int64_t ts_ms = 0;
    std::int64_t seq = 0;
};

/// Additive Gaussian angle noise followed by quantization, standing in for
/// the tip IMU's filtered output.
class ImuEmulator {
public:
    static constexpr double default_sigma_deg = 0.03;
    static constexpr double default_quantum_deg = 0.01;

    explicit ImuEmulator(std::uint64_t seed, double sigma_deg = default_sigma_deg,
                         double quantum_deg = default_quantum_deg)
        : rng_(seed), noise_(0.0, sigma_deg > 0.0 ? sigma_deg : 1.0), sigma_(sigma_deg), quantum_(quantum_deg) {}

    ImuReading sample(const TipPose& pose, std::int64_t ts_ms) {
        ImuReading r;
        r.roll_deg = measure(pose.roll_deg);
        r.pitch_deg = measure(pose.pitch_deg);
        r.yaw_deg = measure(pose.yaw_deg);
        r.ts_ms = ts_ms;
        r.seq = ++seq_;
        return r;
    }

    double sigma() const noexcept { return sigma_; }

private:
    double measure(double truth) {
        const double v = sigma_ > 0.0 ? truth + noise_(rng_) : truth;
        if (quantum_ <= 0.0) {
            return v;
        }
        const double inv = std::round(1.0 / quantum_);
        if (std::abs(inv * quantum_ - 1.0) < 1e-9) {
            // k / 100 rather than k * 0.01 keeps the printed form short.
            return std::round(v * inv) / inv;
        }
        return std::round(v / quantum_) * quantum_;
    }

    std::mt19937_64 rng_;
    std::normal_distribution<double> noise_;
    double sigma_;
    double quantum_;
    std::int64_t seq_ = 0;
};

} // namespace teleprobe::probe
