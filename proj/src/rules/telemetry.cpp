#include <fnfleet/rules/telemetry.hpp>

#include <fnfleet/common/error.hpp>

#include <algorithm>
#include <cmath>

namespace fnfleet::rules {

void validate_batch(const TelemetryBatch& batch)
{
    if (batch.metric.empty()) {
        throw MalformedBatch("metric must not be empty");
    }
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        if (!std::isfinite(batch.samples[i].value)) {
            throw MalformedBatch("sample " + std::to_string(i) + " is not a finite number");
        }
        if (i > 0 && batch.samples[i].timestamp < batch.samples[i - 1].timestamp) {
            throw MalformedBatch("sample timestamps decrease at index " + std::to_string(i));
        }
    }
}

void to_json(nlohmann::json& j, const Sample& sample)
{
    j = nlohmann::json{{"timestamp", format_iso8601(sample.timestamp)}, {"value", sample.value}};
}

void from_json(const nlohmann::json& j, Sample& sample)
{
    sample.timestamp = parse_iso8601(j.at("timestamp").get<std::string>());
    sample.value = j.at("value").get<double>();
}

void to_json(nlohmann::json& j, const TelemetryBatch& batch)
{
    j = nlohmann::json{{"device_id", batch.device_id},
                       {"metric", batch.metric},
                       {"samples", batch.samples},
                       {"received_at", format_iso8601(batch.received_at)}};
}

TelemetryBatch batch_from_json(const nlohmann::json& j)
{
    try {
        TelemetryBatch batch;
        batch.device_id = j.at("device_id").get<std::string>();
        batch.metric = j.at("metric").get<std::string>();
        for (const auto& item : j.value("samples", nlohmann::json::array())) {
            if (!item.at("value").is_number()) {
                throw MalformedBatch("sample values must be numbers");
            }
            batch.samples.push_back(item.get<Sample>());
        }
        if (j.contains("received_at")) {
            batch.received_at = parse_iso8601(j.at("received_at").get<std::string>());
        }
        return batch;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedBatch(std::string("malformed telemetry batch: ") + e.what());
    } catch (const ValidationError& e) {
        throw MalformedBatch(e.what());
    }
}

TelemetryStore::TelemetryStore(std::shared_ptr<registry::Store> store) : store_(std::move(store))
{
    auto image = store_->load();
    // Batch ids are allocated in arrival order, so map order replays arrivals.
    for (const auto& [id, body] : image[registry::EntityKind::TelemetryBatch]) {
        auto batch = batch_from_json(body);
        insert_locked(batch.device_id, batch.metric, batch.samples);
        batch_ids_.observe(id);
    }
}

void TelemetryStore::insert_locked(const std::string& device_id, const std::string& metric,
                                   const std::vector<Sample>& samples)
{
    auto& series = series_[{device_id, metric}];
    for (const auto& sample : samples) {
        auto at = std::upper_bound(series.begin(), series.end(), sample.timestamp,
                                   [](Timestamp t, const Sample& s) { return t < s.timestamp; });
        series.insert(at, sample);
    }
    total_ += samples.size();
}

std::size_t TelemetryStore::append(const TelemetryBatch& batch)
{
    validate_batch(batch);
    if (batch.samples.empty()) {
        return 0;
    }
    std::lock_guard lock(mutex_);
    auto id = batch_ids_.next();
    nlohmann::json body = batch;
    body["id"] = id;
    store_->put(registry::EntityKind::TelemetryBatch, id, body);
    insert_locked(batch.device_id, batch.metric, batch.samples);
    return batch.samples.size();
}

std::vector<Sample> TelemetryStore::query(const std::string& device_id, const std::string& metric, Timestamp from,
                                          Timestamp to) const
{
    if (to < from) {
        throw ValidationError("query range ends before it starts");
    }
    std::lock_guard lock(mutex_);
    auto it = series_.find({device_id, metric});
    if (it == series_.end()) {
        return {};
    }
    const auto& series = it->second;
    auto begin = std::lower_bound(series.begin(), series.end(), from,
                                  [](const Sample& s, Timestamp t) { return s.timestamp < t; });
    auto end = std::lower_bound(begin, series.end(), to, [](const Sample& s, Timestamp t) { return s.timestamp < t; });
    return {begin, end};
}

std::size_t TelemetryStore::total_samples() const
{
    std::lock_guard lock(mutex_);
    return total_;
}

} // namespace fnfleet::rules
