#pragma once

#include <fnfleet/rules/telemetry.hpp>

#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

namespace fnfleet::agent {

/// Bounded FIFO of samples awaiting upload. When full, the oldest sample
/// is dropped and counted.
class TelemetryBuffer {
public:
    explicit TelemetryBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(const std::string& metric, const rules::Sample& sample);

    struct Batch {
        std::string metric;
        std::vector<rules::Sample> samples;
        /// Sequence of the newest entry in the batch.
        std::uint64_t last_seq = 0;
    };

    /// Pending samples grouped per metric, in first-appearance order, each
    /// group in arrival order.
    std::vector<Batch> pending() const;

    /// Removes the entries of `batch` (everything of that metric up to its
    /// last sequence) once it has been delivered.
    void acknowledge(const Batch& batch);

    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }
    std::uint64_t dropped() const;
    void clear();

private:
    struct Entry {
        std::uint64_t seq;
        std::string metric;
        rules::Sample sample;
    };

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::deque<Entry> entries_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t dropped_ = 0;
};

} // namespace fnfleet::agent
