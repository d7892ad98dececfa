#include <fnfleet/rules/pipeline.hpp>

#include <fnfleet/common/error.hpp>

namespace fnfleet::rules {

TelemetryPipeline::TelemetryPipeline(std::shared_ptr<registry::Store> store, net::Client& client,
                                     DeviceExists device_exists, AddressResolver resolve, std::string notifier_url,
                                     TimeSource clock)
    : telemetry_(store), engine_(store), dispatcher_(client, std::move(resolve), std::move(notifier_url)),
      device_exists_(std::move(device_exists)), clock_(std::move(clock))
{
}

std::shared_ptr<std::mutex> TelemetryPipeline::device_mutex(const std::string& device_id)
{
    std::lock_guard lock(locks_mutex_);
    auto& slot = device_locks_[device_id];
    if (!slot) {
        slot = std::make_shared<std::mutex>();
    }
    return slot;
}

IngestReport TelemetryPipeline::ingest_telemetry(TelemetryBatch batch)
{
    validate_batch(batch);
    if (!device_exists_(batch.device_id)) {
        throw UnknownDevice("device " + batch.device_id + " is not registered");
    }
    batch.received_at = clock_();

    auto lock_ptr = device_mutex(batch.device_id);
    std::lock_guard fifo(*lock_ptr);

    IngestReport report;
    report.stored = telemetry_.append(batch);
    for (const auto& sample : batch.samples) {
        auto evaluation = engine_.evaluate(TelemetryEvent{batch.device_id, batch.metric, sample.value, sample.timestamp});
        report.suppressed += evaluation.suppressed.size();
        if (!evaluation.suppressed.empty()) {
            std::lock_guard lock(outcomes_mutex_);
            for (const auto& rule_id : evaluation.suppressed) {
                suppressions_.push_back(Suppression{rule_id, sample.timestamp});
            }
        }
        for (const auto& fired : evaluation.fired) {
            auto outcome = dispatcher_.dispatch(fired);
            OutcomeObserver observer;
            {
                std::lock_guard lock(outcomes_mutex_);
                outcomes_.push_back(outcome);
                observer = observer_;
            }
            if (observer) {
                observer(outcome);
            }
            report.outcomes.push_back(std::move(outcome));
        }
    }
    return report;
}

std::vector<Sample> TelemetryPipeline::query_telemetry(const std::string& device_id, const std::string& metric,
                                                       Timestamp from, Timestamp to) const
{
    if (!device_exists_(device_id)) {
        throw UnknownDevice("device " + device_id + " is not registered");
    }
    return telemetry_.query(device_id, metric, from, to);
}

InteropRule TelemetryPipeline::create_rule(InteropRule draft)
{
    return engine_.create_rule(std::move(draft), device_exists_);
}

std::vector<ActionOutcome> TelemetryPipeline::outcomes() const
{
    std::lock_guard lock(outcomes_mutex_);
    return outcomes_;
}

std::vector<Suppression> TelemetryPipeline::suppressions() const
{
    std::lock_guard lock(outcomes_mutex_);
    return suppressions_;
}

void TelemetryPipeline::set_outcome_observer(OutcomeObserver observer)
{
    std::lock_guard lock(outcomes_mutex_);
    observer_ = std::move(observer);
}

} // namespace fnfleet::rules
