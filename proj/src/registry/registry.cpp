#include <fnfleet/registry/registry.hpp>

#include <fnfleet/common/error.hpp>
#include <fnfleet/registry/codec.hpp>
#include <fnfleet/registry/validation.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>

namespace fnfleet::registry {

namespace {

/// Attribute values arrive as text; convert to the declared kind.
std::optional<ParamValue> convert_attribute(const std::string& text, ParamKind kind)
{
    switch (kind) {
    case ParamKind::Integer: {
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            return std::nullopt;
        }
        return value;
    }
    case ParamKind::Real: {
        if (text.empty()) {
            return std::nullopt;
        }
        char* end = nullptr;
        double value = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size()) {
            return std::nullopt;
        }
        return value;
    }
    case ParamKind::Boolean:
        if (text == "true" || text == "1") {
            return true;
        }
        if (text == "false" || text == "0") {
            return false;
        }
        return std::nullopt;
    case ParamKind::String: return text;
    }
    return std::nullopt;
}

FunctionDraft draft_of(const FunctionDefinition& f)
{
    return FunctionDraft{f.name, f.source, f.interpreter_template, f.params, f.extension};
}

} // namespace

Registry::Registry(std::shared_ptr<Store> store, TimeSource clock) : store_(std::move(store)), clock_(std::move(clock))
{
    load();
}

void Registry::load()
{
    auto image = store_->load();
    for (const auto& [id, body] : image[EntityKind::Function]) {
        FunctionRecord record;
        for (const auto& version : body.at("versions")) {
            record.versions.push_back(version.get<FunctionDefinition>());
        }
        functions_[id] = std::move(record);
        function_ids_.observe(id);
    }
    for (const auto& [id, body] : image[EntityKind::Device]) {
        auto device = body.get<Device>();
        device_by_address_[device.address.to_string()] = id;
        devices_[id] = std::move(device);
        device_ids_.observe(id);
    }
    for (const auto& [id, body] : image[EntityKind::Deployment]) {
        deployments_[id] = body.get<Deployment>();
        deployment_ids_.observe(id);
    }
    for (const auto& [id, body] : image[EntityKind::AutoDeployRule]) {
        autodeploy_rules_[id] = body.get<AutoDeployRule>();
        rule_ids_.observe(id);
    }
}

void Registry::persist_function(const std::string& id) const
{
    json versions = json::array();
    for (const auto& version : functions_.at(id).versions) {
        versions.push_back(version);
    }
    store_->put(EntityKind::Function, id, json{{"id", id}, {"versions", versions}});
}

void Registry::persist_device(const Device& device) const
{
    store_->put(EntityKind::Device, device.id, device);
}

void Registry::persist_deployment(const Deployment& deployment) const
{
    store_->put(EntityKind::Deployment, deployment.id, deployment);
}

const Registry::FunctionRecord& Registry::function_record(const std::string& id) const
{
    auto it = functions_.find(id);
    if (it == functions_.end()) {
        throw NotFound("function " + id + " not found");
    }
    return it->second;
}

Device& Registry::device_ref(const std::string& id)
{
    auto it = devices_.find(id);
    if (it == devices_.end()) {
        throw NotFound("device " + id + " not found");
    }
    return it->second;
}

FunctionDefinition Registry::create_function(const FunctionDraft& draft)
{
    validate_function(draft);
    std::lock_guard lock(mutex_);
    FunctionDefinition function;
    function.id = function_ids_.next();
    function.name = draft.name;
    function.source = draft.source;
    function.interpreter_template = draft.interpreter_template;
    function.params = draft.params;
    function.extension = draft.extension;
    function.version = 1;
    functions_[function.id].versions.push_back(function);
    persist_function(function.id);
    return function;
}

FunctionDefinition Registry::update_function(const std::string& id, const FunctionPatch& patch)
{
    std::lock_guard lock(mutex_);
    auto it = functions_.find(id);
    if (it == functions_.end()) {
        throw NotFound("function " + id + " not found");
    }
    FunctionDefinition next = it->second.latest();
    FunctionDraft draft = draft_of(next);
    if (patch.name) {
        draft.name = *patch.name;
    }
    if (patch.source) {
        draft.source = *patch.source;
    }
    if (patch.interpreter_template) {
        draft.interpreter_template = *patch.interpreter_template;
    }
    if (patch.params) {
        draft.params = *patch.params;
    }
    if (patch.extension) {
        draft.extension = *patch.extension;
    }
    validate_function(draft);
    for (const auto& [rule_id, rule] : autodeploy_rules_) {
        if (rule.function_id != id) {
            continue;
        }
        for (const auto& [name, value] : rule.binding_template) {
            if (std::none_of(draft.params.begin(), draft.params.end(),
                             [&](const ParamSpec& p) { return p.name == name; })) {
                throw ValidationError("auto-deploy rule " + rule_id + " binds '" + name +
                                      "', which the update removes");
            }
        }
    }
    next.name = draft.name;
    next.source = draft.source;
    next.interpreter_template = draft.interpreter_template;
    next.params = draft.params;
    next.extension = draft.extension;
    next.version = it->second.latest().version + 1;
    it->second.versions.push_back(next);
    persist_function(id);
    return next;
}

void Registry::delete_function(const std::string& id)
{
    std::lock_guard lock(mutex_);
    function_record(id);
    for (const auto& [dep_id, deployment] : deployments_) {
        if (deployment.function_id == id && deployment.state == DeploymentState::Running) {
            throw InUseError("function " + id + " is running as deployment " + dep_id);
        }
    }
    for (const auto& [rule_id, rule] : autodeploy_rules_) {
        if (rule.function_id == id) {
            throw InUseError("function " + id + " is referenced by auto-deploy rule " + rule_id);
        }
    }
    functions_.erase(id);
    store_->erase(EntityKind::Function, id);
}

FunctionDefinition Registry::get_function(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    return function_record(id).latest();
}

FunctionDefinition Registry::get_function_version(const std::string& id, std::int64_t version) const
{
    std::lock_guard lock(mutex_);
    for (const auto& candidate : function_record(id).versions) {
        if (candidate.version == version) {
            return candidate;
        }
    }
    throw NotFound("function " + id + " has no version " + std::to_string(version));
}

std::vector<FunctionDefinition> Registry::list_functions() const
{
    std::lock_guard lock(mutex_);
    std::vector<FunctionDefinition> out;
    for (const auto& [id, record] : functions_) {
        out.push_back(record.latest());
    }
    return out;
}

std::optional<Bindings> Registry::bindings_for_rule(const AutoDeployRule& rule,
                                                    const std::vector<Capability>& capabilities,
                                                    std::string& reason) const
{
    const auto& function = function_record(rule.function_id).latest();
    Bindings raw;
    for (const auto& [name, value] : rule.binding_template) {
        if (const auto* literal = std::get_if<ParamValue>(&value)) {
            raw[name] = *literal;
            continue;
        }
        const auto& attr = std::get<AttributeRef>(value);
        auto text = find_attribute(capabilities, attr.name);
        if (!text) {
            reason = "device does not report attribute '" + attr.name + "'";
            return std::nullopt;
        }
        const auto* spec = function.find_param(name);
        auto converted = spec ? convert_attribute(*text, spec->kind) : std::nullopt;
        if (!converted) {
            reason = "attribute '" + attr.name + "'='" + *text + "' does not fit parameter '" + name + "'";
            return std::nullopt;
        }
        raw[name] = *converted;
    }
    try {
        return resolve_bindings(function, raw);
    } catch (const BindingError& e) {
        reason = e.what();
        return std::nullopt;
    }
}

RegistrationResult Registry::register_device(const Address& address, std::vector<Capability> capabilities,
                                             std::optional<std::string> base_dir)
{
    std::lock_guard lock(mutex_);
    RegistrationResult result;

    Device* device = nullptr;
    if (auto known = device_by_address_.find(address.to_string()); known != device_by_address_.end()) {
        device = &devices_.at(known->second);
        device->capabilities = std::move(capabilities);
        // it just reached us, so it is no longer unreachable
        if (device->status == DeviceStatus::Unreachable) {
            device->status = DeviceStatus::Pending;
        }
    } else {
        Device fresh;
        fresh.id = device_ids_.next();
        fresh.address = address;
        fresh.capabilities = std::move(capabilities);
        fresh.status = DeviceStatus::Pending;
        fresh.registered_at = clock_();
        fresh.transport_credentials = address.to_string();
        device_by_address_[address.to_string()] = fresh.id;
        device = &(devices_[fresh.id] = std::move(fresh));
        result.newly_created = true;
    }
    if (base_dir) {
        device->base_dir = *base_dir;
    }

    for (const auto& [dep_id, deployment] : deployments_) {
        if (deployment.device_id == device->id &&
            (deployment.state == DeploymentState::Running || is_in_flight(deployment.state))) {
            result.retained.push_back(deployment);
        }
    }

    for (const auto& [rule_id, rule] : autodeploy_rules_) {
        if (!rule.matches(device->capabilities)) {
            continue;
        }
        bool already_live = std::any_of(result.retained.begin(), result.retained.end(), [&](const Deployment& d) {
            return d.origin_rule_id == rule_id;
        });
        if (already_live) {
            continue;
        }
        std::string reason;
        auto bindings = bindings_for_rule(rule, device->capabilities, reason);
        if (!bindings) {
            result.skipped.push_back(SkippedRule{rule_id, reason});
            continue;
        }
        Deployment deployment;
        deployment.id = deployment_ids_.next();
        deployment.device_id = device->id;
        deployment.function_id = rule.function_id;
        deployment.function_version = function_record(rule.function_id).latest().version;
        deployment.bindings = std::move(*bindings);
        deployment.state = DeploymentState::Requested;
        deployment.origin_rule_id = rule_id;
        deployments_[deployment.id] = deployment;
        persist_deployment(deployment);
        result.created.push_back(std::move(deployment));
    }

    if (!result.created.empty()) {
        device->status = DeviceStatus::Active;
        result.branch = RegistrationBranch::Deploy;
    } else if (!result.retained.empty()) {
        reconcile_locked(*device);
        if (device->status == DeviceStatus::Pending) {
            // an assignment is still in flight; it is no longer awaiting a decision
            device->status = DeviceStatus::Active;
        }
        result.branch = RegistrationBranch::Deploy;
    } else {
        device->status = DeviceStatus::Pending;
        device->manually_activated = false;
        result.branch = RegistrationBranch::Pending;
    }
    persist_device(*device);
    result.device = *device;
    return result;
}

Device Registry::get_device(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    auto it = devices_.find(id);
    if (it == devices_.end()) {
        throw NotFound("device " + id + " not found");
    }
    return it->second;
}

std::optional<Device> Registry::find_device_by_address(const Address& address) const
{
    std::lock_guard lock(mutex_);
    auto it = device_by_address_.find(address.to_string());
    if (it == device_by_address_.end()) {
        return std::nullopt;
    }
    return devices_.at(it->second);
}

bool Registry::device_exists(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    return devices_.count(id) != 0;
}

std::vector<Device> Registry::list_devices(std::optional<DeviceStatus> status) const
{
    std::lock_guard lock(mutex_);
    std::vector<Device> out;
    for (const auto& [id, device] : devices_) {
        if (!status || device.status == *status) {
            out.push_back(device);
        }
    }
    return out;
}

std::vector<Device> Registry::list_pending_devices() const
{
    auto pending = list_devices(DeviceStatus::Pending);
    std::stable_sort(pending.begin(), pending.end(), [](const Device& a, const Device& b) {
        return a.registered_at < b.registered_at;
    });
    return pending;
}

Deployment Registry::assign_deployment(const std::string& device_id, const std::string& function_id,
                                       const Bindings& bindings)
{
    std::lock_guard lock(mutex_);
    device_ref(device_id);
    const auto& function = function_record(function_id).latest();
    Deployment deployment;
    deployment.bindings = resolve_bindings(function, bindings);
    deployment.id = deployment_ids_.next();
    deployment.device_id = device_id;
    deployment.function_id = function_id;
    deployment.function_version = function.version;
    deployment.state = DeploymentState::Requested;
    deployments_[deployment.id] = deployment;
    persist_deployment(deployment);
    return deployment;
}

Deployment Registry::commit_deployment(const Deployment& updated)
{
    std::lock_guard lock(mutex_);
    auto it = deployments_.find(updated.id);
    if (it == deployments_.end()) {
        throw NotFound("deployment " + updated.id + " not found");
    }
    Deployment& stored = it->second;
    if (updated.device_id != stored.device_id || updated.function_id != stored.function_id ||
        updated.function_version != stored.function_version) {
        throw PreconditionError("deployment " + updated.id + " cannot change device, function or version");
    }
    if (updated.state != stored.state && !is_legal_transition(stored.state, updated.state)) {
        throw PreconditionError("illegal deployment transition " + std::string(to_string(stored.state)) + " -> " +
                                std::string(to_string(updated.state)));
    }
    if (updated.handle.has_value() != (updated.state == DeploymentState::Running)) {
        throw PreconditionError("deployment handle must be present exactly while Running");
    }
    stored = updated;
    persist_deployment(stored);
    auto& device = device_ref(stored.device_id);
    auto before = device;
    reconcile_locked(device);
    if (!(device == before)) {
        persist_device(device);
    }
    return stored;
}

void Registry::reconcile_locked(Device& device)
{
    bool running = false;
    bool in_flight = false;
    for (const auto& [id, deployment] : deployments_) {
        if (deployment.device_id != device.id) {
            continue;
        }
        running = running || deployment.state == DeploymentState::Running;
        in_flight = in_flight || is_in_flight(deployment.state);
    }
    if (running) {
        device.status = DeviceStatus::Active;
    } else if (in_flight || device.status == DeviceStatus::Unreachable) {
        return;
    } else if (device.manually_activated) {
        device.status = DeviceStatus::Active;
    } else {
        device.status = DeviceStatus::Pending;
    }
}

Deployment Registry::get_deployment(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    auto it = deployments_.find(id);
    if (it == deployments_.end()) {
        throw NotFound("deployment " + id + " not found");
    }
    return it->second;
}

std::vector<Deployment> Registry::list_deployments(std::optional<std::string> device_id) const
{
    std::lock_guard lock(mutex_);
    std::vector<Deployment> out;
    for (const auto& [id, deployment] : deployments_) {
        if (!device_id || deployment.device_id == *device_id) {
            out.push_back(deployment);
        }
    }
    return out;
}

void Registry::mark_manually_activated(const std::string& device_id)
{
    std::lock_guard lock(mutex_);
    auto& device = device_ref(device_id);
    device.manually_activated = true;
    reconcile_locked(device);
    persist_device(device);
}

void Registry::mark_unreachable(const std::string& device_id)
{
    std::lock_guard lock(mutex_);
    auto& device = device_ref(device_id);
    device.status = DeviceStatus::Unreachable;
    persist_device(device);
}

AutoDeployRule Registry::create_autodeploy_rule(std::set<std::string> capability_predicate,
                                                const std::string& function_id,
                                                std::map<std::string, TemplateValue> binding_template)
{
    std::lock_guard lock(mutex_);
    const auto& function = function_record(function_id).latest();
    for (const auto& tag : capability_predicate) {
        if (tag.empty() || tag.find_first_of("; =\t") != std::string::npos) {
            throw ValidationError("capability predicate tag '" + tag + "' is malformed");
        }
    }
    for (const auto& [name, value] : binding_template) {
        const auto* spec = function.find_param(name);
        if (spec == nullptr) {
            throw ValidationError("binding template key '" + name + "' is not a parameter of " + function.name);
        }
        if (const auto* literal = std::get_if<ParamValue>(&value); literal && !value_matches(spec->kind, *literal)) {
            throw ValidationError("binding template literal for '" + name + "' does not match kind " +
                                  std::string(to_string(spec->kind)));
        }
    }
    AutoDeployRule rule;
    rule.id = rule_ids_.next();
    rule.capability_predicate = std::move(capability_predicate);
    rule.function_id = function_id;
    rule.binding_template = std::move(binding_template);
    autodeploy_rules_[rule.id] = rule;
    store_->put(EntityKind::AutoDeployRule, rule.id, rule);
    return rule;
}

AutoDeployRule Registry::get_autodeploy_rule(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    auto it = autodeploy_rules_.find(id);
    if (it == autodeploy_rules_.end()) {
        throw NotFound("auto-deploy rule " + id + " not found");
    }
    return it->second;
}

std::vector<AutoDeployRule> Registry::list_autodeploy_rules() const
{
    std::lock_guard lock(mutex_);
    std::vector<AutoDeployRule> out;
    for (const auto& [id, rule] : autodeploy_rules_) {
        out.push_back(rule);
    }
    return out;
}

void Registry::delete_autodeploy_rule(const std::string& id)
{
    std::lock_guard lock(mutex_);
    if (autodeploy_rules_.erase(id) == 0) {
        throw NotFound("auto-deploy rule " + id + " not found");
    }
    store_->erase(EntityKind::AutoDeployRule, id);
}

} // namespace fnfleet::registry
