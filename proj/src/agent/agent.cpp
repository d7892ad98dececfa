#include <fnfleet/agent/agent.hpp>

#include <fnfleet/common/error.hpp>
#include <fnfleet/common/process.hpp>
#include <fnfleet/deploy/launch_plan.hpp>
#include <fnfleet/registry/validation.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

namespace fnfleet::agent {

using nlohmann::json;

Duration backoff_delay(int attempt)
{
    if (attempt <= 1) {
        return Duration{0};
    }
    Duration delay = std::chrono::seconds(1);
    for (int i = 2; i < attempt && delay < std::chrono::seconds(60); ++i) {
        delay *= 2;
    }
    return std::min<Duration>(delay, std::chrono::seconds(60));
}

DeviceAgent::DeviceAgent(AgentConfig config, net::Client& client, Sleeper sleeper)
    : config_(std::move(config)), client_(client), sleeper_(std::move(sleeper)),
      buffer_(config_.telemetry_capacity)
{
    config_.validate();
    plane_ = net::Url::parse(config_.control_plane);
    if (!sleeper_) {
        sleeper_ = [](Duration d) { std::this_thread::sleep_for(d); };
    }
    if (!config_.state_file.empty()) {
        std::ifstream in(config_.state_file);
        auto state = json::parse(in, nullptr, false);
        if (!state.is_discarded() && state.contains("device_id") && state["device_id"].is_string()) {
            device_id_ = state["device_id"].get<std::string>();
        }
    }
}

void DeviceAgent::persist_device_id(const std::string& id) const
{
    if (config_.state_file.empty()) {
        return;
    }
    std::error_code ec;
    if (config_.state_file.has_parent_path()) {
        std::filesystem::create_directories(config_.state_file.parent_path(), ec);
    }
    auto tmp = config_.state_file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << json{{"device_id", id}}.dump() << "\n";
    }
    std::filesystem::rename(tmp, config_.state_file, ec);
}

std::string DeviceAgent::boot_register()
{
    const std::string path = plane_.path == "/" ? "/devices" : plane_.path + "/devices";
    json body{{"address", config_.address}, {"capabilities", config_.capabilities}, {"base_dir", config_.base_dir}};
    std::string last_error;
    const int attempts = 1 + config_.retry_budget;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) {
            auto delay = backoff_delay(attempt);
            {
                std::lock_guard lock(mutex_);
                backoff_.push_back(delay);
            }
            sleeper_(delay);
        }
        {
            std::lock_guard lock(mutex_);
            ++attempts_;
        }
        try {
            auto response = client_.post_json(plane_.authority(), path, body.dump());
            if (response.status == 201 || response.status == 200) {
                auto reply = json::parse(response.body);
                auto id = reply.at("device_id").get<std::string>();
                {
                    std::lock_guard lock(mutex_);
                    device_id_ = id;
                }
                persist_device_id(id);
                return id;
            }
            if (response.status >= 400 && response.status < 500) {
                throw ValidationError("registration rejected (" + std::to_string(response.status) +
                                      "): " + response.body);
            }
            last_error = "status " + std::to_string(response.status);
        } catch (const ConnectionError& e) {
            last_error = e.what();
        } catch (const json::exception& e) {
            last_error = std::string("bad reply: ") + e.what();
        }
    }
    throw RegistrationExhausted("registration failed after " + std::to_string(attempts) +
                                " attempt(s): " + last_error);
}

std::string DeviceAgent::restart()
{
    buffer_.clear();
    return boot_register();
}

std::optional<std::string> DeviceAgent::device_id() const
{
    std::lock_guard lock(mutex_);
    return device_id_;
}

std::vector<Duration> DeviceAgent::backoff_history() const
{
    std::lock_guard lock(mutex_);
    return backoff_;
}

std::shared_ptr<std::mutex> DeviceAgent::group_mutex(const std::string& group)
{
    auto& slot = group_locks_[group];
    if (!slot) {
        slot = std::make_shared<std::mutex>();
    }
    return slot;
}

void DeviceAgent::register_handler(const std::string& action, ActionHandler handler, const std::string& group)
{
    std::lock_guard lock(mutex_);
    handlers_[action] = Registered{std::move(handler), group.empty() ? action : group};
}

void DeviceAgent::unregister_group(const std::string& group)
{
    std::lock_guard lock(mutex_);
    std::erase_if(handlers_, [&](const auto& entry) { return entry.second.group == group; });
}

bool DeviceAgent::has_handler(const std::string& action) const
{
    std::lock_guard lock(mutex_);
    return handlers_.count(action) != 0;
}

ActionReply DeviceAgent::invoke(const std::string& action, const json& params)
{
    ActionHandler handler;
    std::shared_ptr<std::mutex> serial;
    {
        std::lock_guard lock(mutex_);
        auto it = handlers_.find(action);
        if (it == handlers_.end()) {
            return ActionReply{false, "unknown action '" + action + "'", 404};
        }
        handler = it->second.handler;
        serial = group_mutex(it->second.group);
    }
    std::lock_guard one_at_a_time(*serial);
    try {
        return ActionReply{true, handler(params), 200};
    } catch (const std::exception& e) {
        return ActionReply{false, std::string("handler failed: ") + e.what(), 500};
    }
}

net::Response DeviceAgent::handle(const net::Request& request)
{
    auto reply = [](int status, const json& body) { return net::Response{status, body.dump(), "application/json"}; };
    auto body = json::parse(request.body, nullptr, false);

    if (request.path == "/actions") {
        if (request.method != "POST") {
            return reply(405, json{{"status", "failed"}, {"detail", "use POST"}});
        }
        if (!body.is_object() || !body.contains("action") || !body["action"].is_string()) {
            return reply(400, json{{"status", "failed"}, {"detail", "expected {action, params}"}});
        }
        json params = body.contains("params") ? body["params"] : json::object();
        auto result = invoke(body["action"].get<std::string>(), params);
        return reply(result.status, json{{"status", result.ok ? "ok" : "failed"}, {"detail", result.detail}});
    }
    if (request.path == "/telemetry" && request.method == "POST") {
        try {
            if (!body.is_object()) {
                throw MalformedBatch("expected {metric, samples}");
            }
            json full = body;
            full["device_id"] = device_id().value_or("");
            auto batch = rules::batch_from_json(full);
            emit_telemetry(batch.metric, batch.samples);
            return reply(202, json{{"buffered", batch.samples.size()}});
        } catch (const Error& e) {
            return reply(400, json{{"status", "failed"}, {"detail", e.what()}});
        }
    }
    if (request.path == "/health") {
        return reply(200, json{{"device_id", device_id().value_or("")}, {"buffered", buffered_samples()}});
    }
    return reply(404, json{{"status", "failed"}, {"detail", "no route for " + request.path}});
}

void DeviceAgent::emit_telemetry(const std::string& metric, const std::vector<rules::Sample>& samples)
{
    for (const auto& sample : samples) {
        buffer_.push(metric, sample);
    }
}

std::size_t DeviceAgent::flush_telemetry()
{
    std::lock_guard serial(flush_mutex_);
    auto id = device_id();
    if (!id) {
        return 0;
    }
    const std::string path = plane_.path == "/" ? "/telemetry" : plane_.path + "/telemetry";
    std::size_t delivered = 0;
    for (const auto& batch : buffer_.pending()) {
        rules::TelemetryBatch wire{*id, batch.metric, batch.samples, {}};
        json body = wire;
        body.erase("received_at");
        try {
            auto response = client_.post_json(plane_.authority(), path, body.dump());
            if (response.status >= 200 && response.status < 300) {
                delivered += batch.samples.size();
                buffer_.acknowledge(batch);
            } else if (response.status >= 400 && response.status < 500) {
                // retrying a rejected batch would block the uplink forever
                rejected_ += batch.samples.size();
                buffer_.acknowledge(batch);
            }
        } catch (const ConnectionError&) {
            break;
        }
    }
    return delivered;
}

ActionHandler make_record_handler(std::shared_ptr<DeviceFilesystem> fs, std::string base_dir)
{
    auto counter = std::make_shared<std::size_t>(0);
    return [fs, base_dir, counter](const json& params) -> std::string {
        if (!params.contains("duration") || !params["duration"].is_number()) {
            throw std::invalid_argument("record needs a numeric duration");
        }
        double duration = params["duration"].get<double>();
        if (!(duration > 0) || duration > 3600) {
            throw std::invalid_argument("record duration out of range");
        }
        auto existing = fs->list(base_dir + "/recordings/");
        auto path = base_dir + "/recordings/rec-" + std::to_string(existing.size() + 1) + ".bin";
        auto size = static_cast<std::size_t>(std::llround(duration * kRecordingBytesPerUnit));
        fs->write(path, std::string(size, 'v'));
        ++*counter;
        return path;
    };
}

ActionHandler make_relay_handler(std::shared_ptr<DeviceFilesystem> fs, std::string base_dir, bool on)
{
    return [fs, base_dir, on](const json&) -> std::string {
        fs->write(base_dir + "/relay.state", on ? "on" : "off");
        return on ? "relay on" : "relay off";
    };
}

ActionHandler make_command_handler(std::string command_template)
{
    return [command_template](const json& params) -> std::string {
        std::string command;
        std::size_t cursor = 0;
        for (const auto& placeholder : registry::scan_placeholders(command_template)) {
            if (!params.contains(placeholder.name)) {
                throw UnresolvedPlaceholder("missing param '" + placeholder.name + "'");
            }
            const auto& value = params[placeholder.name];
            std::string text = value.is_string() ? value.get<std::string>() : value.dump();
            if (!deploy::is_shell_safe(text)) {
                throw UnsafeValue("param '" + placeholder.name + "' is not a safe token");
            }
            command += command_template.substr(cursor, placeholder.offset - cursor);
            command += text;
            cursor = placeholder.offset + placeholder.length;
        }
        command += command_template.substr(cursor);
        auto result = run_process("/bin/sh", {"-c", command});
        if (result.exit_code != 0) {
            throw HandlerFailure("exit " + std::to_string(result.exit_code) + ": " + result.err);
        }
        return result.out;
    };
}

} // namespace fnfleet::agent
