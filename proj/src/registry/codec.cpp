#include <fnfleet/registry/codec.hpp>

#include <fnfleet/common/error.hpp>

namespace fnfleet::registry {

namespace {

template <typename T>
T required_field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) {
        throw ValidationError(std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback)
{
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
}

std::vector<ParamSpec> params_from_json(const json& j)
{
    if (!j.is_array()) {
        throw ValidationError("'params' must be an array");
    }
    std::vector<ParamSpec> params;
    for (const auto& item : j) {
        params.push_back(item.get<ParamSpec>());
    }
    return params;
}

} // namespace

ParamValue param_value_from_json(const json& j)
{
    if (j.is_boolean()) {
        return j.get<bool>();
    }
    if (j.is_number_integer()) {
        return j.get<std::int64_t>();
    }
    if (j.is_number_float()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        return j.get<std::string>();
    }
    throw ValidationError("parameter values must be scalars, got " + j.dump());
}

json to_json_value(const ParamValue& value)
{
    return std::visit([](const auto& v) { return json(v); }, value);
}

Bindings bindings_from_json(const json& j)
{
    if (j.is_null()) {
        return {};
    }
    if (!j.is_object()) {
        throw BindingError("bindings must be a JSON object");
    }
    Bindings bindings;
    for (const auto& [key, value] : j.items()) {
        try {
            bindings[key] = param_value_from_json(value);
        } catch (const ValidationError& e) {
            throw BindingError("binding '" + key + "': " + e.what());
        }
    }
    return bindings;
}

void to_json(json& j, const ParamSpec& spec)
{
    j = json{{"name", spec.name}, {"kind", to_string(spec.kind)}, {"required", spec.required}};
    if (spec.default_value) {
        j["default"] = to_json_value(*spec.default_value);
    }
}

void from_json(const json& j, ParamSpec& spec)
{
    spec.name = required_field<std::string>(j, "name");
    spec.kind = parse_param_kind(required_field<std::string>(j, "kind"));
    spec.required = optional_field<bool>(j, "required", false);
    spec.default_value.reset();
    if (j.contains("default") && !j.at("default").is_null()) {
        spec.default_value = param_value_from_json(j.at("default"));
        // a real-valued default written as an integer literal is still a real
        if (spec.kind == ParamKind::Real && std::holds_alternative<std::int64_t>(*spec.default_value)) {
            spec.default_value = static_cast<double>(std::get<std::int64_t>(*spec.default_value));
        }
    }
}

void to_json(json& j, const FunctionDefinition& function)
{
    j = json{{"id", function.id},
             {"name", function.name},
             {"source", function.source},
             {"interpreter_template", function.interpreter_template},
             {"params", function.params},
             {"extension", function.extension},
             {"version", function.version}};
}

void from_json(const json& j, FunctionDefinition& function)
{
    function.id = required_field<std::string>(j, "id");
    function.name = required_field<std::string>(j, "name");
    function.source = required_field<std::string>(j, "source");
    function.interpreter_template = required_field<std::string>(j, "interpreter_template");
    function.params = params_from_json(j.value("params", json::array()));
    function.extension = optional_field<std::string>(j, "extension", "");
    function.version = required_field<std::int64_t>(j, "version");
}

FunctionDraft function_draft_from_json(const json& j)
{
    FunctionDraft draft;
    draft.name = required_field<std::string>(j, "name");
    draft.source = required_field<std::string>(j, "source");
    draft.interpreter_template = required_field<std::string>(j, "interpreter_template");
    draft.params = params_from_json(j.value("params", json::array()));
    draft.extension = optional_field<std::string>(j, "extension", "");
    return draft;
}

FunctionPatch function_patch_from_json(const json& j)
{
    if (!j.is_object()) {
        throw ValidationError("function update must be a JSON object");
    }
    FunctionPatch patch;
    if (j.contains("name")) {
        patch.name = required_field<std::string>(j, "name");
    }
    if (j.contains("source")) {
        patch.source = required_field<std::string>(j, "source");
    }
    if (j.contains("interpreter_template")) {
        patch.interpreter_template = required_field<std::string>(j, "interpreter_template");
    }
    if (j.contains("params")) {
        patch.params = params_from_json(j.at("params"));
    }
    if (j.contains("extension")) {
        patch.extension = required_field<std::string>(j, "extension");
    }
    return patch;
}

void to_json(json& j, const Device& device)
{
    json capabilities = json::array();
    for (const auto& capability : device.capabilities) {
        capabilities.push_back(capability.to_string());
    }
    j = json{{"id", device.id},
             {"address", device.address.to_string()},
             {"capabilities", capabilities},
             {"status", to_string(device.status)},
             {"registered_at", format_iso8601(device.registered_at)},
             {"transport_credentials", device.transport_credentials},
             {"base_dir", device.base_dir},
             {"manually_activated", device.manually_activated}};
}

void from_json(const json& j, Device& device)
{
    device.id = required_field<std::string>(j, "id");
    device.address = Address::parse(required_field<std::string>(j, "address"));
    device.capabilities.clear();
    for (const auto& text : j.value("capabilities", json::array())) {
        device.capabilities.push_back(Capability::parse(text.get<std::string>()));
    }
    device.status = parse_device_status(required_field<std::string>(j, "status"));
    device.registered_at = parse_iso8601(required_field<std::string>(j, "registered_at"));
    device.transport_credentials = optional_field<std::string>(j, "transport_credentials", "");
    device.base_dir = optional_field<std::string>(j, "base_dir", "");
    device.manually_activated = optional_field<bool>(j, "manually_activated", false);
}

void to_json(json& j, const Deployment& deployment)
{
    json bindings = json::object();
    for (const auto& [name, value] : deployment.bindings) {
        bindings[name] = to_json_value(value);
    }
    j = json{{"id", deployment.id},
             {"device_id", deployment.device_id},
             {"function_id", deployment.function_id},
             {"function_version", deployment.function_version},
             {"bindings", bindings},
             {"state", to_string(deployment.state)},
             {"remote_path", deployment.remote_path}};
    if (deployment.handle) {
        j["handle"] = *deployment.handle;
    }
    if (deployment.failure_reason) {
        j["failure_reason"] = *deployment.failure_reason;
    }
    if (deployment.origin_rule_id) {
        j["origin_rule_id"] = *deployment.origin_rule_id;
    }
}

void from_json(const json& j, Deployment& deployment)
{
    deployment.id = required_field<std::string>(j, "id");
    deployment.device_id = required_field<std::string>(j, "device_id");
    deployment.function_id = required_field<std::string>(j, "function_id");
    deployment.function_version = required_field<std::int64_t>(j, "function_version");
    deployment.bindings.clear();
    const json bindings = j.value("bindings", json::object());
    for (const auto& [name, value] : bindings.items()) {
        deployment.bindings[name] = param_value_from_json(value);
    }
    deployment.state = parse_deployment_state(required_field<std::string>(j, "state"));
    deployment.remote_path = optional_field<std::string>(j, "remote_path", "");
    deployment.handle.reset();
    deployment.failure_reason.reset();
    deployment.origin_rule_id.reset();
    if (j.contains("handle")) {
        deployment.handle = j.at("handle").get<std::string>();
    }
    if (j.contains("failure_reason")) {
        deployment.failure_reason = j.at("failure_reason").get<std::string>();
    }
    if (j.contains("origin_rule_id")) {
        deployment.origin_rule_id = j.at("origin_rule_id").get<std::string>();
    }
}

void to_json(json& j, const AutoDeployRule& rule)
{
    json binding_template = json::object();
    for (const auto& [name, value] : rule.binding_template) {
        if (const auto* attr = std::get_if<AttributeRef>(&value)) {
            binding_template[name] = json{{"attr", attr->name}};
        } else {
            binding_template[name] = to_json_value(std::get<ParamValue>(value));
        }
    }
    j = json{{"id", rule.id},
             {"capability_predicate", rule.capability_predicate},
             {"function_id", rule.function_id},
             {"binding_template", binding_template}};
}

void from_json(const json& j, AutoDeployRule& rule)
{
    rule.id = optional_field<std::string>(j, "id", "");
    rule.function_id = required_field<std::string>(j, "function_id");
    rule.capability_predicate = optional_field<std::set<std::string>>(j, "capability_predicate", {});
    rule.binding_template.clear();
    const auto& raw = j.contains("binding_template") ? j.at("binding_template") : json::object();
    if (!raw.is_object()) {
        throw ValidationError("binding_template must be an object");
    }
    for (const auto& [name, value] : raw.items()) {
        if (value.is_object()) {
            if (!value.contains("attr") || !value.at("attr").is_string()) {
                throw ValidationError("binding_template entry '" + name + "' must be a scalar or {\"attr\": name}");
            }
            rule.binding_template[name] = AttributeRef{value.at("attr").get<std::string>()};
        } else {
            rule.binding_template[name] = param_value_from_json(value);
        }
    }
}

} // namespace fnfleet::registry
