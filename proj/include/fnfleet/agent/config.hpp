#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fnfleet::agent {

struct AgentConfig {
    /// Control plane base URL, e.g. http://10.0.0.1:8080.
    std::string control_plane;
    /// host:port this device registers under; the action endpoint listens on it.
    std::string address;
    /// "tag" or "tag;key=value".
    std::vector<std::string> capabilities;
    std::string base_dir = "/opt/fnfleet";
    /// Registration attempts after the first one.
    int retry_budget = 8;
    /// Where the assigned device id is remembered; empty disables it.
    std::filesystem::path state_file;
    std::size_t telemetry_capacity = 1000;
    /// Seconds between telemetry pushes.
    double telemetry_interval = 10.0;
    /// Action name to shell command template; {param} placeholders are
    /// filled from the request params.
    std::map<std::string, std::string> actions;

    /// Throws ValidationError.
    void validate() const;

    static AgentConfig from_json(const nlohmann::json& j);
    /// Missing file: UsageError.
    static AgentConfig load(const std::filesystem::path& file);
};

} // namespace fnfleet::agent
