#pragma once

#include <fnfleet/common/ids.hpp>
#include <fnfleet/registry/store.hpp>
#include <fnfleet/rules/rule.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fnfleet::rules {

struct FiredAction {
    std::string rule_id;
    std::size_t action_index = 0;
    Action action;
    TelemetryEvent event;
};

struct Evaluation {
    std::vector<FiredAction> fired;
    /// Rules whose condition held but which were still cooling down.
    std::vector<std::string> suppressed;
};

/// Condition-action rules, evaluated in creation order. Creation, deletion
/// and evaluation are mutually exclusive, so an event sees a rule entirely
/// or not at all.
class RuleEngine {
public:
    explicit RuleEngine(std::shared_ptr<registry::Store> store);

    InteropRule create_rule(InteropRule draft, const std::function<bool(const std::string&)>& device_exists);
    InteropRule get_rule(const std::string& id) const;
    std::vector<InteropRule> list_rules() const;
    void delete_rule(const std::string& id);

    /// A rule fires when its (source, metric) matches, the comparator holds
    /// and at least `cooldown` of event time has passed since it last fired.
    /// A zero cooldown never suppresses.
    Evaluation evaluate(const TelemetryEvent& event);

private:
    std::shared_ptr<registry::Store> store_;
    IdSequence rule_ids_{"rule"};
    mutable std::mutex mutex_;
    std::map<std::string, InteropRule> rules_;
    std::map<std::string, Timestamp> last_fired_;
};

} // namespace fnfleet::rules
