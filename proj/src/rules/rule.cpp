#include <fnfleet/rules/rule.hpp>

#include <fnfleet/common/error.hpp>
#include <fnfleet/registry/validation.hpp>

#include <algorithm>
#include <array>
#include <charconv>

namespace fnfleet::rules {

namespace {

constexpr std::array<std::string_view, 4> kMessagePlaceholders = {"device", "metric", "value", "timestamp"};

std::string format_value(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

} // namespace

std::string_view to_string(Comparator comparator)
{
    switch (comparator) {
    case Comparator::Less: return "<";
    case Comparator::LessEqual: return "<=";
    case Comparator::Greater: return ">";
    case Comparator::GreaterEqual: return ">=";
    case Comparator::Equal: return "=";
    case Comparator::NotEqual: return "!=";
    }
    return "=";
}

Comparator parse_comparator(std::string_view text)
{
    if (text == "<") {
        return Comparator::Less;
    }
    if (text == "<=" || text == "≤") {
        return Comparator::LessEqual;
    }
    if (text == ">") {
        return Comparator::Greater;
    }
    if (text == ">=" || text == "≥") {
        return Comparator::GreaterEqual;
    }
    if (text == "=" || text == "==") {
        return Comparator::Equal;
    }
    if (text == "!=" || text == "≠") {
        return Comparator::NotEqual;
    }
    throw ValidationError("unknown comparator '" + std::string(text) + "'");
}

bool holds(Comparator comparator, double value, double threshold)
{
    switch (comparator) {
    case Comparator::Less: return value < threshold;
    case Comparator::LessEqual: return value <= threshold;
    case Comparator::Greater: return value > threshold;
    case Comparator::GreaterEqual: return value >= threshold;
    case Comparator::Equal: return value == threshold;
    case Comparator::NotEqual: return value != threshold;
    }
    return false;
}

void validate_rule(const InteropRule& rule, const std::function<bool(const std::string&)>& device_exists)
{
    if (rule.actions.empty()) {
        throw ValidationError("an interop rule needs at least one action");
    }
    if (rule.cooldown.count() < 0) {
        throw ValidationError("cooldown must not be negative");
    }
    if (rule.condition.metric.empty()) {
        throw ValidationError("condition metric must not be empty");
    }
    if (rule.condition.source_device_id.empty()) {
        throw ValidationError("condition needs a source device");
    }
    for (const auto& action : rule.actions) {
        if (const auto* invoke = std::get_if<DeviceInvoke>(&action)) {
            if (invoke->action_name.empty()) {
                throw ValidationError("device action needs a name");
            }
            if (!invoke->params.is_object()) {
                throw ValidationError("device action params must be an object");
            }
            if (!device_exists(invoke->target_device_id)) {
                throw ValidationError("action target device " + invoke->target_device_id + " is not registered");
            }
        } else {
            const auto& notify = std::get<Notify>(action);
            for (const auto& placeholder : registry::scan_placeholders(notify.message_template)) {
                if (std::find(kMessagePlaceholders.begin(), kMessagePlaceholders.end(), placeholder.name) ==
                    kMessagePlaceholders.end()) {
                    throw ValidationError("notification placeholder {" + placeholder.name + "} is not supported");
                }
            }
        }
    }
}

std::string render_message(const std::string& message_template, const TelemetryEvent& event)
{
    std::string out;
    std::size_t cursor = 0;
    for (const auto& placeholder : registry::scan_placeholders(message_template)) {
        out.append(message_template, cursor, placeholder.offset - cursor);
        if (placeholder.name == "device") {
            out += event.device_id;
        } else if (placeholder.name == "metric") {
            out += event.metric;
        } else if (placeholder.name == "value") {
            out += format_value(event.value);
        } else if (placeholder.name == "timestamp") {
            out += format_iso8601(event.timestamp);
        } else {
            out.append(message_template, placeholder.offset, placeholder.length);
        }
        cursor = placeholder.offset + placeholder.length;
    }
    out.append(message_template, cursor, std::string::npos);
    return out;
}

void to_json(nlohmann::json& j, const Action& action)
{
    if (const auto* invoke = std::get_if<DeviceInvoke>(&action)) {
        j = nlohmann::json{{"type", "invoke"},
                           {"target_device_id", invoke->target_device_id},
                           {"action_name", invoke->action_name},
                           {"params", invoke->params}};
    } else {
        j = nlohmann::json{{"type", "notify"}, {"message_template", std::get<Notify>(action).message_template}};
    }
}

Action action_from_json(const nlohmann::json& j)
{
    try {
        auto type = j.at("type").get<std::string>();
        if (type == "invoke") {
            DeviceInvoke invoke;
            invoke.target_device_id = j.at("target_device_id").get<std::string>();
            invoke.action_name = j.at("action_name").get<std::string>();
            invoke.params = j.value("params", nlohmann::json::object());
            return invoke;
        }
        if (type == "notify") {
            return Notify{j.at("message_template").get<std::string>()};
        }
        throw ValidationError("unknown action type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed action: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const InteropRule& rule)
{
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& action : rule.actions) {
        actions.push_back(action);
    }
    j = nlohmann::json{{"id", rule.id},
                       {"condition",
                        {{"source_device_id", rule.condition.source_device_id},
                         {"metric", rule.condition.metric},
                         {"comparator", to_string(rule.condition.comparator)},
                         {"threshold", rule.condition.threshold}}},
                       {"actions", actions},
                       {"cooldown", duration_to_seconds(rule.cooldown)}};
}

InteropRule rule_from_json(const nlohmann::json& j)
{
    try {
        InteropRule rule;
        rule.id = j.value("id", "");
        const auto& condition = j.at("condition");
        rule.condition.source_device_id = condition.at("source_device_id").get<std::string>();
        rule.condition.metric = condition.at("metric").get<std::string>();
        rule.condition.comparator = parse_comparator(condition.at("comparator").get<std::string>());
        if (!condition.at("threshold").is_number()) {
            throw ValidationError("threshold must be a number");
        }
        rule.condition.threshold = condition.at("threshold").get<double>();
        for (const auto& action : j.at("actions")) {
            rule.actions.push_back(action_from_json(action));
        }
        if (j.contains("cooldown")) {
            if (!j.at("cooldown").is_number()) {
                throw ValidationError("cooldown must be a number of seconds");
            }
            rule.cooldown = seconds_to_duration(j.at("cooldown").get<double>());
        }
        return rule;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed interop rule: ") + e.what());
    }
}

} // namespace fnfleet::rules
