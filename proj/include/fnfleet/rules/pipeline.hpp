#pragma once

#include <fnfleet/rules/dispatcher.hpp>
#include <fnfleet/rules/rule_engine.hpp>
#include <fnfleet/rules/telemetry.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace fnfleet::rules {

struct Suppression {
    std::string rule_id;
    Timestamp event_time{};
};

struct IngestReport {
    std::size_t stored = 0;
    std::vector<ActionOutcome> outcomes;
    std::size_t suppressed = 0;
};

/// Ingest path: store the batch, then evaluate every sample in timestamp
/// order and dispatch what fires. Batches from one device are handled in
/// arrival order; different devices run concurrently.
class TelemetryPipeline {
public:
    using DeviceExists = std::function<bool(const std::string&)>;
    using OutcomeObserver = std::function<void(const ActionOutcome&)>;

    TelemetryPipeline(std::shared_ptr<registry::Store> store, net::Client& client, DeviceExists device_exists,
                      AddressResolver resolve, std::string notifier_url, TimeSource clock);

    /// Throws UnknownDevice or MalformedBatch; dispatch failures are only
    /// recorded as outcomes.
    IngestReport ingest_telemetry(TelemetryBatch batch);

    std::vector<Sample> query_telemetry(const std::string& device_id, const std::string& metric, Timestamp from,
                                        Timestamp to) const;

    InteropRule create_rule(InteropRule draft);
    std::vector<InteropRule> list_rules() const { return engine_.list_rules(); }
    InteropRule get_rule(const std::string& id) const { return engine_.get_rule(id); }
    void delete_rule(const std::string& id) { engine_.delete_rule(id); }

    /// Append-only log of every dispatch.
    std::vector<ActionOutcome> outcomes() const;
    void set_outcome_observer(OutcomeObserver observer);
    /// Append-only log of firings withheld by a cooldown.
    std::vector<Suppression> suppressions() const;

    const TelemetryStore& telemetry() const { return telemetry_; }
    RuleEngine& engine() { return engine_; }

private:
    std::shared_ptr<std::mutex> device_mutex(const std::string& device_id);

    TelemetryStore telemetry_;
    RuleEngine engine_;
    ActionDispatcher dispatcher_;
    DeviceExists device_exists_;
    TimeSource clock_;

    std::mutex locks_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> device_locks_;

    mutable std::mutex outcomes_mutex_;
    std::vector<ActionOutcome> outcomes_;
    std::vector<Suppression> suppressions_;
    OutcomeObserver observer_;
};

} // namespace fnfleet::rules
