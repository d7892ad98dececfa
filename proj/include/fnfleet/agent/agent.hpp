#pragma once

#include <fnfleet/agent/config.hpp>
#include <fnfleet/agent/telemetry_buffer.hpp>
#include <fnfleet/common/filesystem.hpp>
#include <fnfleet/common/time.hpp>
#include <fnfleet/net/message.hpp>

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fnfleet::agent {

/// Runs one action. Returns a detail string; throwing reports a failure.
using ActionHandler = std::function<std::string(const nlohmann::json& params)>;

using Sleeper = std::function<void(Duration)>;

/// Delay before registration attempt `attempt` (1-based; the first attempt
/// has none): 1 s, doubling, capped at 60 s.
Duration backoff_delay(int attempt);

struct ActionReply {
    bool ok = false;
    std::string detail;
    /// HTTP status the action endpoint answers with.
    int status = 200;
};

/// Device-side runtime: boot registration, the action endpoint and the
/// telemetry uplink.
class DeviceAgent {
public:
    DeviceAgent(AgentConfig config, net::Client& client, Sleeper sleeper = {});

    /// POST /devices until it succeeds, backing off between attempts. Throws
    /// RegistrationExhausted once the retry budget is spent.
    std::string boot_register();

    /// Handlers sharing a `group` (one running function) never run
    /// concurrently.
    void register_handler(const std::string& action, ActionHandler handler, const std::string& group = "");
    void unregister_group(const std::string& group);
    bool has_handler(const std::string& action) const;

    ActionReply invoke(const std::string& action, const nlohmann::json& params);

    /// POST /actions {action, params} -> {status, detail}; POST /telemetry
    /// {metric, samples} buffers samples for the next push.
    net::Response handle(const net::Request& request);
    net::Handler handler()
    {
        return [this](const net::Request& request) { return handle(request); };
    }

    void emit_telemetry(const std::string& metric, const std::vector<rules::Sample>& samples);

    /// Pushes one batch per metric. Undelivered batches stay buffered;
    /// batches the control plane rejects as malformed are dropped. Returns
    /// the number of samples delivered.
    std::size_t flush_telemetry();

    /// Process restart: the telemetry buffer is lost, handlers are kept
    /// (running functions survive), and registration runs again.
    std::string restart();

    std::optional<std::string> device_id() const;
    const AgentConfig& config() const { return config_; }
    std::uint64_t dropped_samples() const { return buffer_.dropped() + rejected_; }
    std::size_t buffered_samples() const { return buffer_.size(); }
    std::size_t registration_attempts() const { return attempts_; }
    std::vector<Duration> backoff_history() const;

private:
    struct Registered {
        ActionHandler handler;
        std::string group;
    };

    std::shared_ptr<std::mutex> group_mutex(const std::string& group);
    void persist_device_id(const std::string& id) const;

    AgentConfig config_;
    net::Client& client_;
    Sleeper sleeper_;
    net::Url plane_;

    mutable std::mutex mutex_;
    std::optional<std::string> device_id_;
    std::map<std::string, Registered> handlers_;
    std::map<std::string, std::shared_ptr<std::mutex>> group_locks_;
    std::vector<Duration> backoff_;
    std::size_t attempts_ = 0;

    TelemetryBuffer buffer_;
    std::mutex flush_mutex_;
    std::uint64_t rejected_ = 0;
};

/// Writes a recording artifact of `params.duration` time units under
/// `<base_dir>/recordings/`; its length is kRecordingBytesPerUnit per unit.
inline constexpr std::size_t kRecordingBytesPerUnit = 1000;
ActionHandler make_record_handler(std::shared_ptr<DeviceFilesystem> fs, std::string base_dir);

/// Sets the relay state file (`<base_dir>/relay.state`) to "on" or "off".
ActionHandler make_relay_handler(std::shared_ptr<DeviceFilesystem> fs, std::string base_dir, bool on);

/// Runs a shell command template with {param} placeholders filled from the
/// request params; values must be shell-safe tokens. Nonzero exit fails.
ActionHandler make_command_handler(std::string command_template);

} // namespace fnfleet::agent
