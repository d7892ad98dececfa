#include <fnfleet/agent/telemetry_buffer.hpp>

#include <algorithm>

namespace fnfleet::agent {

void TelemetryBuffer::push(const std::string& metric, const rules::Sample& sample)
{
    std::lock_guard lock(mutex_);
    if (entries_.size() >= capacity_) {
        entries_.pop_front();
        ++dropped_;
    }
    entries_.push_back(Entry{next_seq_++, metric, sample});
}

std::vector<TelemetryBuffer::Batch> TelemetryBuffer::pending() const
{
    std::lock_guard lock(mutex_);
    std::vector<Batch> batches;
    for (const auto& entry : entries_) {
        auto it = std::find_if(batches.begin(), batches.end(),
                               [&](const Batch& b) { return b.metric == entry.metric; });
        if (it == batches.end()) {
            batches.push_back(Batch{entry.metric, {}, 0});
            it = std::prev(batches.end());
        }
        it->samples.push_back(entry.sample);
        it->last_seq = entry.seq;
    }
    return batches;
}

void TelemetryBuffer::acknowledge(const Batch& batch)
{
    std::lock_guard lock(mutex_);
    std::erase_if(entries_, [&](const Entry& e) { return e.metric == batch.metric && e.seq <= batch.last_seq; });
}

std::size_t TelemetryBuffer::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::uint64_t TelemetryBuffer::dropped() const
{
    std::lock_guard lock(mutex_);
    return dropped_;
}

void TelemetryBuffer::clear()
{
    std::lock_guard lock(mutex_);
    entries_.clear();
}

} // namespace fnfleet::agent
