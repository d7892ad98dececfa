#pragma once

#include <fnfleet/common/time.hpp>
#include <fnfleet/net/message.hpp>
#include <fnfleet/rules/rule_engine.hpp>

#include <functional>
#include <optional>
#include <string>

namespace fnfleet::rules {

enum class OutcomeStatus { Delivered, Failed };

std::string_view to_string(OutcomeStatus status);

struct ActionOutcome {
    std::string rule_id;
    std::size_t action_index = 0;
    OutcomeStatus status = OutcomeStatus::Failed;
    std::string detail;
    Timestamp fired_at{};
};

void to_json(nlohmann::json& j, const ActionOutcome& outcome);

/// Resolves a device id to the address of its agent endpoint.
using AddressResolver = std::function<std::optional<std::string>(const std::string& device_id)>;

/// Delivers fired actions over HTTP: device invocations to
/// `POST <agent>/actions` with {"action", "params"}, notifications to the
/// webhook with {"text", "fired_at", "rule_id"}. Never throws.
class ActionDispatcher {
public:
    ActionDispatcher(net::Client& client, AddressResolver resolve, std::string notifier_url)
        : client_(client), resolve_(std::move(resolve)), notifier_url_(std::move(notifier_url))
    {
    }

    ActionOutcome dispatch(const FiredAction& fired);

    const std::string& notifier_url() const { return notifier_url_; }

private:
    ActionOutcome deliver(const FiredAction& fired, const std::string& target, const std::string& path,
                          const nlohmann::json& body);

    net::Client& client_;
    AddressResolver resolve_;
    std::string notifier_url_;
};

} // namespace fnfleet::rules
