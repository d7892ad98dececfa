#pragma once

#include <fnfleet/common/time.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fnfleet::registry {

enum class ParamKind { Integer, Real, String, Boolean };

std::string_view to_string(ParamKind kind);
ParamKind parse_param_kind(std::string_view text);

/// A bound or default parameter value. Index order matches ParamKind.
using ParamValue = std::variant<std::int64_t, double, std::string, bool>;

bool value_matches(ParamKind kind, const ParamValue& value);

using Bindings = std::map<std::string, ParamValue>;

struct ParamSpec {
    std::string name;
    ParamKind kind = ParamKind::String;
    bool required = false;
    std::optional<ParamValue> default_value;

    bool operator==(const ParamSpec&) const = default;
};

struct FunctionDefinition {
    std::string id;
    std::string name;
    std::string source;
    std::string interpreter_template;
    std::vector<ParamSpec> params;
    /// File extension for the remote copy, without the dot. Empty means none.
    std::string extension;
    std::int64_t version = 1;

    const ParamSpec* find_param(std::string_view name) const;

    bool operator==(const FunctionDefinition&) const = default;
};

/// Fields an administrator supplies; id and version are assigned by the registry.
struct FunctionDraft {
    std::string name;
    std::string source;
    std::string interpreter_template;
    std::vector<ParamSpec> params;
    std::string extension;
};

/// Partial update; unset fields keep their current value.
struct FunctionPatch {
    std::optional<std::string> name;
    std::optional<std::string> source;
    std::optional<std::string> interpreter_template;
    std::optional<std::vector<ParamSpec>> params;
    std::optional<std::string> extension;
};

struct Address {
    std::string host;
    std::uint16_t port = 0;

    std::string to_string() const;

    /// `host:port`; throws ValidationError if malformed.
    static Address parse(std::string_view text);

    auto operator<=>(const Address&) const = default;
};

/// A capability tag with optional `key=value` attributes, written
/// `tag;key=value;key2=value2`.
struct Capability {
    std::string tag;
    std::map<std::string, std::string> attributes;

    std::string to_string() const;
    static Capability parse(std::string_view text);

    bool operator==(const Capability&) const = default;
};

std::optional<std::string> find_attribute(const std::vector<Capability>& capabilities, std::string_view key);
std::set<std::string> tags_of(const std::vector<Capability>& capabilities);

enum class DeviceStatus { Pending, Active, Unreachable };

std::string_view to_string(DeviceStatus status);
DeviceStatus parse_device_status(std::string_view text);

struct Device {
    std::string id;
    Address address;
    std::vector<Capability> capabilities;
    DeviceStatus status = DeviceStatus::Pending;
    Timestamp registered_at{};
    std::string transport_credentials;
    /// Directory on the device that receives function files.
    std::string base_dir;
    /// Set once an administrator assignment reached Running.
    bool manually_activated = false;

    bool operator==(const Device&) const = default;
};

enum class DeploymentState { Requested, Transferred, Running, Failed, Stopped };

std::string_view to_string(DeploymentState state);
DeploymentState parse_deployment_state(std::string_view text);

/// The only legal edges: Requested->Transferred->Running,
/// Requested/Transferred->Failed, Running->Stopped, Running->Failed.
bool is_legal_transition(DeploymentState from, DeploymentState to);

/// Requested or Transferred: handed to the engine but not settled.
bool is_in_flight(DeploymentState state);

struct Deployment {
    std::string id;
    std::string device_id;
    std::string function_id;
    std::int64_t function_version = 0;
    Bindings bindings;
    DeploymentState state = DeploymentState::Requested;
    std::optional<std::string> handle;
    std::optional<std::string> failure_reason;
    /// Auto-deploy rule that produced this deployment, if any.
    std::optional<std::string> origin_rule_id;
    std::string remote_path;

    bool operator==(const Deployment&) const = default;
};

struct AttributeRef {
    std::string name;

    bool operator==(const AttributeRef&) const = default;
};

using TemplateValue = std::variant<ParamValue, AttributeRef>;

struct AutoDeployRule {
    std::string id;
    std::set<std::string> capability_predicate;
    std::string function_id;
    std::map<std::string, TemplateValue> binding_template;

    bool matches(const std::vector<Capability>& capabilities) const;

    bool operator==(const AutoDeployRule&) const = default;
};

} // namespace fnfleet::registry
