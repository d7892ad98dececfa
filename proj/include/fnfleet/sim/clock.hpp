#pragma once

#include <fnfleet/common/time.hpp>

#include <chrono>
#include <mutex>

namespace fnfleet::sim {

enum class ClockMode { Virtual, Wall };

/// Scenario time. One time unit is one second. Virtual time moves only
/// when advanced; wall time follows the real clock from the epoch on and
/// advance_to() waits for it.
class SimClock {
public:
    /// 2024-01-01T00:00:00Z
    static Timestamp default_epoch();

    explicit SimClock(ClockMode mode, Timestamp epoch = default_epoch());

    ClockMode mode() const { return mode_; }
    Timestamp epoch() const { return epoch_; }
    Timestamp now() const;

    /// Moves to `t`; never goes backwards.
    void advance_to(Timestamp t);
    void step(Duration d) { advance_to(now() + d); }

    Timestamp at(double units) const { return epoch_ + seconds_to_duration(units); }
    double units_since_epoch(Timestamp t) const { return duration_to_seconds(t - epoch_); }

    TimeSource source()
    {
        return [this] { return now(); };
    }

private:
    ClockMode mode_;
    Timestamp epoch_;
    std::chrono::steady_clock::time_point wall_start_;
    mutable std::mutex mutex_;
    Timestamp virtual_now_;
};

} // namespace fnfleet::sim
