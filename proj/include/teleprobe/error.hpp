#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace teleprobe {

/// Step position outside an axis' travel.
class range_error : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Calibration file that does not parse or violates an envelope invariant.
class calibration_error : public std::runtime_error {
public:
    static constexpr std::size_t no_index = static_cast<std::size_t>(-1);

    explicit calibration_error(const std::string& what, std::size_t grid_index = no_index)
        : std::runtime_error(what), grid_index_(grid_index) {}

    /// Offending grid index, or `no_index` for parse-level failures.
    std::size_t grid_index() const noexcept { return grid_index_; }

private:
    std::size_t grid_index_;
};

/// Statistic requested on data that cannot support it (empty list, zero variance, ...).
class stats_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Socket-level failure: bind, dial, or a lost upstream that could not be restored.
class service_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace teleprobe
