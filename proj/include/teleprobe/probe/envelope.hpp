#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "teleprobe/error.hpp"

namespace teleprobe::probe {

/// Ascending/descending calibration branches of one steering axis, sampled on
/// a shared step grid. Values between grid points are linearly interpolated.
class BacklashEnvelope {
public:
    static constexpr double coincide_tol = 1e-9;

    BacklashEnvelope() = default;

    /// Validates and stores the branches. Throws calibration_error naming the
    /// first offending grid index.
    BacklashEnvelope(std::vector<std::int64_t> grid, std::vector<double> ascending_deg,
                     std::vector<double> descending_deg, std::int64_t zone_lo, std::int64_t zone_hi)
        : grid_(std::move(grid)),
          asc_(std::move(ascending_deg)),
          desc_(std::move(descending_deg)),
          zone_lo_(zone_lo),
          zone_hi_(zone_hi) {
        validate();
    }

    const std::vector<std::int64_t>& grid() const noexcept { return grid_; }
    const std::vector<double>& ascending_samples() const noexcept { return asc_; }
    const std::vector<double>& descending_samples() const noexcept { return desc_; }
    std::int64_t min_steps() const noexcept { return grid_.front(); }
    std::int64_t max_steps() const noexcept { return grid_.back(); }
    std::int64_t zone_lo() const noexcept { return zone_lo_; }
    std::int64_t zone_hi() const noexcept { return zone_hi_; }

    double ascending(double steps) const { return interp(asc_, steps); }
    double descending(double steps) const { return interp(desc_, steps); }

    /// Branches differ at `steps` (the play operator can sit strictly between them).
    bool has_gap(double steps) const { return descending(steps) - ascending(steps) > coincide_tol; }

    /// Smallest step position where the ascending branch reaches `tip_deg`.
    double ascending_inverse(double tip_deg) const { return inverse_first(asc_, tip_deg); }
    /// Largest step position where the descending branch is still at or below `tip_deg`.
    double descending_inverse(double tip_deg) const { return inverse_last(desc_, tip_deg); }

    /// Reversal travel needed after climbing the ascending branch to `steps`
    /// before the output moves again.
    double gap_from_ascending(double steps) const {
        return steps - descending_inverse(ascending(steps));
    }

    /// Horizontal chord between the branches at tip level `tip_deg`.
    double gap_at_level(double tip_deg) const {
        return ascending_inverse(tip_deg) - descending_inverse(tip_deg);
    }

private:
    void validate() const {
        if (grid_.size() < 2) {
            throw calibration_error("envelope grid needs at least two points");
        }
        if (asc_.size() != grid_.size() || desc_.size() != grid_.size()) {
            throw calibration_error("envelope branch length differs from grid length");
        }
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            if (grid_[i] <= grid_[i - 1]) {
                throw calibration_error("grid not strictly increasing at index " + std::to_string(i), i);
            }
            if (asc_[i] < asc_[i - 1]) {
                throw calibration_error("ascending branch decreases at index " + std::to_string(i), i);
            }
            if (desc_[i] < desc_[i - 1]) {
                throw calibration_error("descending branch decreases at index " + std::to_string(i), i);
            }
        }
        if (zone_lo_ > zone_hi_) {
            throw calibration_error("hysteresis zone bounds reversed");
        }
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            if (!std::isfinite(asc_[i]) || !std::isfinite(desc_[i])) {
                throw calibration_error("non-finite branch value at index " + std::to_string(i), i);
            }
            if (desc_[i] < asc_[i]) {
                throw calibration_error("descending below ascending at index " + std::to_string(i), i);
            }
            const bool outside = grid_[i] < zone_lo_ || grid_[i] > zone_hi_;
            if (outside && desc_[i] - asc_[i] >= coincide_tol) {
                throw calibration_error(
                    "branches differ outside the hysteresis zone at index " + std::to_string(i), i);
            }
        }
    }

    std::size_t segment(double steps) const {
        if (steps < static_cast<double>(grid_.front()) || steps > static_cast<double>(grid_.back())) {
            throw range_error("step position " + std::to_string(steps) + " outside envelope grid");
        }
        auto it = std::upper_bound(grid_.begin(), grid_.end(), steps,
                                   [](double v, std::int64_t g) { return v < static_cast<double>(g); });
        auto hi = static_cast<std::size_t>(it - grid_.begin());
        return std::clamp<std::size_t>(hi, 1, grid_.size() - 1) - 1;
    }

    double interp(const std::vector<double>& ys, double steps) const {
        const std::size_t i = segment(steps);
        const double x0 = static_cast<double>(grid_[i]);
        const double x1 = static_cast<double>(grid_[i + 1]);
        const double f = (steps - x0) / (x1 - x0);
        return ys[i] + f * (ys[i + 1] - ys[i]);
    }

    double inverse_first(const std::vector<double>& ys, double level) const {
        if (level <= ys.front()) {
            return static_cast<double>(grid_.front());
        }
        for (std::size_t i = 1; i < ys.size(); ++i) {
            if (ys[i] >= level) {
                const double x0 = static_cast<double>(grid_[i - 1]);
                const double x1 = static_cast<double>(grid_[i]);
                return x0 + (level - ys[i - 1]) / (ys[i] - ys[i - 1]) * (x1 - x0);
            }
        }
        return static_cast<double>(grid_.back());
    }

    double inverse_last(const std::vector<double>& ys, double level) const {
        if (level >= ys.back()) {
            return static_cast<double>(grid_.back());
        }
        for (std::size_t i = ys.size() - 1; i-- > 0;) {
            if (ys[i] <= level) {
                const double x0 = static_cast<double>(grid_[i]);
                const double x1 = static_cast<double>(grid_[i + 1]);
                return x0 + (level - ys[i]) / (ys[i + 1] - ys[i]) * (x1 - x0);
            }
        }
        return static_cast<double>(grid_.front());
    }

    std::vector<std::int64_t> grid_;
    std::vector<double> asc_;
    std::vector<double> desc_;
    std::int64_t zone_lo_ = 0;
    std::int64_t zone_hi_ = 0;
};

} // namespace teleprobe::probe
