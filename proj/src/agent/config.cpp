#include <fnfleet/agent/config.hpp>

#include <fnfleet/common/error.hpp>
#include <fnfleet/net/message.hpp>
#include <fnfleet/registry/types.hpp>

#include <fstream>
#include <sstream>

namespace fnfleet::agent {

void AgentConfig::validate() const
{
    if (control_plane.empty()) {
        throw ValidationError("control_plane must be set");
    }
    net::Url::parse(control_plane);
    registry::Address::parse(address);
    for (const auto& capability : capabilities) {
        registry::Capability::parse(capability);
    }
    if (base_dir.empty() || base_dir.front() != '/') {
        throw ValidationError("base_dir must be an absolute path");
    }
    if (retry_budget < 0) {
        throw ValidationError("retry_budget must be >= 0");
    }
    if (telemetry_capacity == 0) {
        throw ValidationError("telemetry_capacity must be positive");
    }
    if (!(telemetry_interval > 0)) {
        throw ValidationError("telemetry_interval must be positive");
    }
}

AgentConfig AgentConfig::from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ValidationError("agent config must be a JSON object");
    }
    AgentConfig config;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "control_plane") {
                config.control_plane = value.get<std::string>();
            } else if (key == "address") {
                config.address = value.get<std::string>();
            } else if (key == "capabilities") {
                config.capabilities = value.get<std::vector<std::string>>();
            } else if (key == "base_dir") {
                config.base_dir = value.get<std::string>();
            } else if (key == "retry_budget") {
                config.retry_budget = value.get<int>();
            } else if (key == "state_file") {
                config.state_file = value.get<std::string>();
            } else if (key == "telemetry_capacity") {
                config.telemetry_capacity = value.get<std::size_t>();
            } else if (key == "telemetry_interval") {
                config.telemetry_interval = value.get<double>();
            } else if (key == "actions") {
                config.actions = value.get<std::map<std::string, std::string>>();
            } else {
                throw ValidationError("unknown agent config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("agent config: ") + e.what());
    }
    return config;
}

AgentConfig AgentConfig::load(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read agent config " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto parsed = nlohmann::json::parse(buffer.str(), nullptr, false);
    if (parsed.is_discarded()) {
        throw ValidationError("agent config " + file.string() + " is not valid JSON");
    }
    return from_json(parsed);
}

} // namespace fnfleet::agent
