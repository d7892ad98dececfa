#include <fnfleet/rules/dispatcher.hpp>

#include <fnfleet/common/error.hpp>

namespace fnfleet::rules {

std::string_view to_string(OutcomeStatus status)
{
    return status == OutcomeStatus::Delivered ? "delivered" : "failed";
}

void to_json(nlohmann::json& j, const ActionOutcome& outcome)
{
    j = nlohmann::json{{"rule_id", outcome.rule_id},
                       {"action_index", outcome.action_index},
                       {"status", to_string(outcome.status)},
                       {"detail", outcome.detail},
                       {"fired_at", format_iso8601(outcome.fired_at)}};
}

ActionOutcome ActionDispatcher::deliver(const FiredAction& fired, const std::string& target, const std::string& path,
                                        const nlohmann::json& body)
{
    ActionOutcome outcome;
    outcome.rule_id = fired.rule_id;
    outcome.action_index = fired.action_index;
    outcome.fired_at = fired.event.timestamp;
    try {
        auto response = client_.post_json(target, path, body.dump());
        if (response.status >= 200 && response.status < 300) {
            outcome.status = OutcomeStatus::Delivered;
            auto reply = nlohmann::json::parse(response.body, nullptr, false);
            outcome.detail = reply.is_object() && reply.contains("detail") && reply["detail"].is_string()
                                 ? reply["detail"].get<std::string>()
                                 : response.body;
        } else {
            outcome.status = OutcomeStatus::Failed;
            outcome.detail = "status " + std::to_string(response.status) + ": " + response.body;
        }
    } catch (const ConnectionError& e) {
        outcome.status = OutcomeStatus::Failed;
        outcome.detail = std::string("connection error: ") + e.what();
    } catch (const std::exception& e) {
        outcome.status = OutcomeStatus::Failed;
        outcome.detail = e.what();
    }
    return outcome;
}

ActionOutcome ActionDispatcher::dispatch(const FiredAction& fired)
{
    if (const auto* invoke = std::get_if<DeviceInvoke>(&fired.action)) {
        auto address = resolve_(invoke->target_device_id);
        if (!address) {
            return ActionOutcome{fired.rule_id, fired.action_index, OutcomeStatus::Failed,
                                 "target device " + invoke->target_device_id + " is unknown", fired.event.timestamp};
        }
        return deliver(fired, *address, "/actions",
                       nlohmann::json{{"action", invoke->action_name}, {"params", invoke->params}});
    }

    const auto& notify = std::get<Notify>(fired.action);
    if (notifier_url_.empty()) {
        return ActionOutcome{fired.rule_id, fired.action_index, OutcomeStatus::Failed, "no notifier configured",
                             fired.event.timestamp};
    }
    net::Url url;
    try {
        url = net::Url::parse(notifier_url_);
    } catch (const Error& e) {
        return ActionOutcome{fired.rule_id, fired.action_index, OutcomeStatus::Failed, e.what(),
                             fired.event.timestamp};
    }
    nlohmann::json body{{"text", render_message(notify.message_template, fired.event)},
                        {"fired_at", format_iso8601(fired.event.timestamp)},
                        {"rule_id", fired.rule_id}};
    return deliver(fired, url.authority(), url.path, body);
}

} // namespace fnfleet::rules
