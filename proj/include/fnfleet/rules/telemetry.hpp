#pragma once

#include <fnfleet/common/ids.hpp>
#include <fnfleet/common/time.hpp>
#include <fnfleet/registry/store.hpp>

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace fnfleet::rules {

struct Sample {
    Timestamp timestamp{};
    double value = 0.0;

    bool operator==(const Sample&) const = default;
};

struct TelemetryBatch {
    std::string device_id;
    std::string metric;
    std::vector<Sample> samples;
    Timestamp received_at{};

    bool operator==(const TelemetryBatch&) const = default;
};

/// Throws MalformedBatch for an empty metric, a non-finite value or
/// decreasing timestamps.
void validate_batch(const TelemetryBatch& batch);

void to_json(nlohmann::json& j, const Sample& sample);
void from_json(const nlohmann::json& j, Sample& sample);
void to_json(nlohmann::json& j, const TelemetryBatch& batch);
/// Parses the wire form; failures raise MalformedBatch.
TelemetryBatch batch_from_json(const nlohmann::json& j);

/// Time-ordered samples per (device, metric), written through to the Store
/// one batch per record.
class TelemetryStore {
public:
    explicit TelemetryStore(std::shared_ptr<registry::Store> store);

    /// Returns the number of samples stored. Empty batches store nothing.
    std::size_t append(const TelemetryBatch& batch);

    /// Samples with from <= t < to, in timestamp order (stable for ties).
    std::vector<Sample> query(const std::string& device_id, const std::string& metric, Timestamp from,
                              Timestamp to) const;

    std::size_t total_samples() const;

private:
    void insert_locked(const std::string& device_id, const std::string& metric, const std::vector<Sample>& samples);

    std::shared_ptr<registry::Store> store_;
    IdSequence batch_ids_{"tb"};
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, std::vector<Sample>> series_;
    std::size_t total_ = 0;
};

} // namespace fnfleet::rules
