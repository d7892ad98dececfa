#pragma once

#include <fnfleet/common/time.hpp>

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fnfleet::rules {

enum class Comparator { Less, LessEqual, Greater, GreaterEqual, Equal, NotEqual };

inline constexpr Comparator kAllComparators[] = {Comparator::Less,         Comparator::LessEqual,
                                                 Comparator::Greater,      Comparator::GreaterEqual,
                                                 Comparator::Equal,        Comparator::NotEqual};

/// ASCII spelling: <, <=, >, >=, =, !=.
std::string_view to_string(Comparator comparator);
/// Also accepts ≤, ≥, ≠ and ==.
Comparator parse_comparator(std::string_view text);
bool holds(Comparator comparator, double value, double threshold);

struct Condition {
    std::string source_device_id;
    std::string metric;
    Comparator comparator = Comparator::Equal;
    double threshold = 0.0;

    bool operator==(const Condition&) const = default;
};

struct DeviceInvoke {
    std::string target_device_id;
    std::string action_name;
    nlohmann::json params = nlohmann::json::object();

    bool operator==(const DeviceInvoke&) const = default;
};

/// Placeholders: {device}, {metric}, {value}, {timestamp}.
struct Notify {
    std::string message_template;

    bool operator==(const Notify&) const = default;
};

using Action = std::variant<DeviceInvoke, Notify>;

struct InteropRule {
    std::string id;
    Condition condition;
    std::vector<Action> actions;
    Duration cooldown{0};

    bool operator==(const InteropRule&) const = default;
};

/// One sample as seen by the rule engine.
struct TelemetryEvent {
    std::string device_id;
    std::string metric;
    double value = 0.0;
    Timestamp timestamp{};
};

/// Throws ValidationError if the rule has no actions, a negative cooldown,
/// an empty metric, an unknown notify placeholder or an invoke target for
/// which `device_exists` is false.
void validate_rule(const InteropRule& rule, const std::function<bool(const std::string&)>& device_exists);

std::string render_message(const std::string& message_template, const TelemetryEvent& event);

void to_json(nlohmann::json& j, const Action& action);
Action action_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const InteropRule& rule);
/// "id" is optional on input; "cooldown" is in seconds.
InteropRule rule_from_json(const nlohmann::json& j);

} // namespace fnfleet::rules
