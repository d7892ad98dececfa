#include <fnfleet/sim/clock.hpp>

#include <thread>

namespace fnfleet::sim {

Timestamp SimClock::default_epoch()
{
    using namespace std::chrono;
    return Timestamp{duration_cast<Duration>(sys_days{year{2024} / January / 1}.time_since_epoch())};
}

SimClock::SimClock(ClockMode mode, Timestamp epoch)
    : mode_(mode), epoch_(epoch), wall_start_(std::chrono::steady_clock::now()), virtual_now_(epoch)
{
}

Timestamp SimClock::now() const
{
    if (mode_ == ClockMode::Wall) {
        return epoch_ +
               std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - wall_start_);
    }
    std::lock_guard lock(mutex_);
    return virtual_now_;
}

void SimClock::advance_to(Timestamp t)
{
    if (mode_ == ClockMode::Wall) {
        std::this_thread::sleep_until(wall_start_ + (t - epoch_));
        return;
    }
    std::lock_guard lock(mutex_);
    if (t > virtual_now_) {
        virtual_now_ = t;
    }
}

} // namespace fnfleet::sim
