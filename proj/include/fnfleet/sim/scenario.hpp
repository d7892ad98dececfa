#pragma once

#include <fnfleet/registry/types.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fnfleet::sim {

struct DeviceSpec {
    std::string name;
    std::string address;
    std::vector<std::string> capabilities;
    double boot_at = 0;
    /// Time units between telemetry pushes from the device's agent.
    double flush_interval = 1;
    std::string base_dir = "/opt/fnfleet";
};

struct FunctionSpec {
    /// Name the rest of the scenario refers to the function by.
    std::string key;
    registry::FunctionDraft draft;
};

/// An auto-deploy rule in API form with the function given by key.
struct AutoDeploySpec {
    std::vector<std::string> capabilities;
    std::string function;
    nlohmann::json bindings = nlohmann::json::object();
};

/// An interop rule in API form, with devices given by name.
struct RuleSpec {
    std::string name;
    double install_at = 0;
    nlohmann::json body;
};

/// Event types: motion {device, duration}, sample {device, metric, value},
/// series {device, metric, every, until, base, jitter}, assign {device,
/// function, bindings}, stop {device, function}, restart {device}, crash
/// {device, function}, probe {device}, offline {device}, online {device},
/// delete_rule {rule}.
struct EventSpec {
    double at = 0;
    std::string type;
    nlohmann::json data;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<DeviceSpec> devices;
    std::vector<FunctionSpec> functions;
    std::vector<AutoDeploySpec> autodeploy;
    std::vector<RuleSpec> rules;
    std::vector<EventSpec> events;
    /// Simulation end; defaults to ten units after the last event.
    double run_until = 0;
    nlohmann::json expect = nlohmann::json::object();
};

/// Throws ValidationError for malformed documents: unknown event types,
/// decreasing event times, duplicate names, references to undeclared
/// devices or functions.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& file);

} // namespace fnfleet::sim
