#include <fnfleet/registry/types.hpp>

#include <fnfleet/common/error.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>

namespace fnfleet::registry {

std::string_view to_string(ParamKind kind)
{
    switch (kind) {
    case ParamKind::Integer: return "integer";
    case ParamKind::Real: return "real";
    case ParamKind::String: return "string";
    case ParamKind::Boolean: return "boolean";
    }
    return "string";
}

ParamKind parse_param_kind(std::string_view text)
{
    if (text == "integer" || text == "int") {
        return ParamKind::Integer;
    }
    if (text == "real" || text == "float") {
        return ParamKind::Real;
    }
    if (text == "string") {
        return ParamKind::String;
    }
    if (text == "boolean" || text == "bool") {
        return ParamKind::Boolean;
    }
    throw ValidationError("unknown parameter kind: " + std::string(text));
}

bool value_matches(ParamKind kind, const ParamValue& value)
{
    switch (kind) {
    case ParamKind::Integer: return std::holds_alternative<std::int64_t>(value);
    case ParamKind::Real: return std::holds_alternative<double>(value) || std::holds_alternative<std::int64_t>(value);
    case ParamKind::String: return std::holds_alternative<std::string>(value);
    case ParamKind::Boolean: return std::holds_alternative<bool>(value);
    }
    return false;
}

const ParamSpec* FunctionDefinition::find_param(std::string_view param_name) const
{
    auto it = std::find_if(params.begin(), params.end(), [&](const ParamSpec& p) { return p.name == param_name; });
    return it == params.end() ? nullptr : &*it;
}

std::string Address::to_string() const
{
    return host + ":" + std::to_string(port);
}

Address Address::parse(std::string_view text)
{
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw ValidationError("address must be host:port, got '" + std::string(text) + "'");
    }
    auto host = text.substr(0, colon);
    for (char c : host) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_') {
            throw ValidationError("bad character in address host: '" + std::string(text) + "'");
        }
    }
    auto port_text = text.substr(colon + 1);
    unsigned port = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0 || port > 65535) {
        throw ValidationError("bad port in address: '" + std::string(text) + "'");
    }
    return Address{std::string(host), static_cast<std::uint16_t>(port)};
}

std::string Capability::to_string() const
{
    std::string out = tag;
    for (const auto& [key, value] : attributes) {
        out += ";" + key + "=" + value;
    }
    return out;
}

Capability Capability::parse(std::string_view text)
{
    Capability capability;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= text.size()) {
        auto end = text.find(';', pos);
        auto part = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        if (part.empty() || part.find_first_of(" \t\r\n") != std::string_view::npos) {
            throw ValidationError("malformed capability '" + std::string(text) + "'");
        }
        if (first) {
            if (part.find('=') != std::string_view::npos) {
                throw ValidationError("capability must start with a tag: '" + std::string(text) + "'");
            }
            capability.tag = std::string(part);
            first = false;
        } else {
            auto eq = part.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                throw ValidationError("capability attribute must be key=value: '" + std::string(text) + "'");
            }
            capability.attributes[std::string(part.substr(0, eq))] = std::string(part.substr(eq + 1));
        }
        if (end == std::string_view::npos) {
            break;
        }
        pos = end + 1;
    }
    return capability;
}

std::optional<std::string> find_attribute(const std::vector<Capability>& capabilities, std::string_view key)
{
    for (const auto& capability : capabilities) {
        if (auto it = capability.attributes.find(std::string(key)); it != capability.attributes.end()) {
            return it->second;
        }
    }
    return std::nullopt;
}

std::set<std::string> tags_of(const std::vector<Capability>& capabilities)
{
    std::set<std::string> tags;
    for (const auto& capability : capabilities) {
        tags.insert(capability.tag);
    }
    return tags;
}

std::string_view to_string(DeviceStatus status)
{
    switch (status) {
    case DeviceStatus::Pending: return "pending";
    case DeviceStatus::Active: return "active";
    case DeviceStatus::Unreachable: return "unreachable";
    }
    return "pending";
}

DeviceStatus parse_device_status(std::string_view text)
{
    if (text == "pending") {
        return DeviceStatus::Pending;
    }
    if (text == "active") {
        return DeviceStatus::Active;
    }
    if (text == "unreachable") {
        return DeviceStatus::Unreachable;
    }
    throw ValidationError("unknown device status: " + std::string(text));
}

std::string_view to_string(DeploymentState state)
{
    switch (state) {
    case DeploymentState::Requested: return "requested";
    case DeploymentState::Transferred: return "transferred";
    case DeploymentState::Running: return "running";
    case DeploymentState::Failed: return "failed";
    case DeploymentState::Stopped: return "stopped";
    }
    return "requested";
}

DeploymentState parse_deployment_state(std::string_view text)
{
    for (auto state : {DeploymentState::Requested, DeploymentState::Transferred, DeploymentState::Running,
                       DeploymentState::Failed, DeploymentState::Stopped}) {
        if (to_string(state) == text) {
            return state;
        }
    }
    throw ValidationError("unknown deployment state: " + std::string(text));
}

bool is_legal_transition(DeploymentState from, DeploymentState to)
{
    using S = DeploymentState;
    switch (from) {
    case S::Requested: return to == S::Transferred || to == S::Failed;
    case S::Transferred: return to == S::Running || to == S::Failed;
    case S::Running: return to == S::Stopped || to == S::Failed;
    case S::Failed:
    case S::Stopped: return false;
    }
    return false;
}

bool is_in_flight(DeploymentState state)
{
    return state == DeploymentState::Requested || state == DeploymentState::Transferred;
}

bool AutoDeployRule::matches(const std::vector<Capability>& capabilities) const
{
    auto tags = tags_of(capabilities);
    return std::includes(tags.begin(), tags.end(), capability_predicate.begin(), capability_predicate.end());
}

} // namespace fnfleet::registry
