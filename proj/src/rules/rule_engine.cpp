#include <fnfleet/rules/rule_engine.hpp>

#include <fnfleet/common/error.hpp>

namespace fnfleet::rules {

RuleEngine::RuleEngine(std::shared_ptr<registry::Store> store) : store_(std::move(store))
{
    auto image = store_->load();
    for (const auto& [id, body] : image[registry::EntityKind::InteropRule]) {
        auto rule = rule_from_json(body);
        rule.id = id;
        rules_[id] = std::move(rule);
        rule_ids_.observe(id);
    }
}

InteropRule RuleEngine::create_rule(InteropRule draft, const std::function<bool(const std::string&)>& device_exists)
{
    validate_rule(draft, device_exists);
    std::lock_guard lock(mutex_);
    draft.id = rule_ids_.next();
    store_->put(registry::EntityKind::InteropRule, draft.id, draft);
    rules_[draft.id] = draft;
    return draft;
}

InteropRule RuleEngine::get_rule(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    auto it = rules_.find(id);
    if (it == rules_.end()) {
        throw NotFound("interop rule " + id + " not found");
    }
    return it->second;
}

std::vector<InteropRule> RuleEngine::list_rules() const
{
    std::lock_guard lock(mutex_);
    std::vector<InteropRule> out;
    for (const auto& [id, rule] : rules_) {
        out.push_back(rule);
    }
    return out;
}

void RuleEngine::delete_rule(const std::string& id)
{
    std::lock_guard lock(mutex_);
    if (rules_.erase(id) == 0) {
        throw NotFound("interop rule " + id + " not found");
    }
    last_fired_.erase(id);
    store_->erase(registry::EntityKind::InteropRule, id);
}

Evaluation RuleEngine::evaluate(const TelemetryEvent& event)
{
    std::lock_guard lock(mutex_);
    Evaluation result;
    for (const auto& [id, rule] : rules_) {
        const auto& condition = rule.condition;
        if (condition.source_device_id != event.device_id || condition.metric != event.metric ||
            !holds(condition.comparator, event.value, condition.threshold)) {
            continue;
        }
        if (rule.cooldown.count() > 0) {
            auto last = last_fired_.find(id);
            if (last != last_fired_.end() && event.timestamp - last->second < rule.cooldown) {
                result.suppressed.push_back(id);
                continue;
            }
        }
        last_fired_[id] = event.timestamp;
        for (std::size_t i = 0; i < rule.actions.size(); ++i) {
            result.fired.push_back(FiredAction{id, i, rule.actions[i], event});
        }
    }
    return result;
}

} // namespace fnfleet::rules
