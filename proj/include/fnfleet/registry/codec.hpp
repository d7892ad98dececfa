#pragma once

#include <fnfleet/registry/types.hpp>

#include <nlohmann/json.hpp>

namespace fnfleet::registry {

using nlohmann::json;

/// JSON scalar to ParamValue. Throws ValidationError for arrays, objects and null.
ParamValue param_value_from_json(const json& j);
json to_json_value(const ParamValue& value);

/// Object of scalars to Bindings; a non-scalar member raises BindingError.
Bindings bindings_from_json(const json& j);

void to_json(json& j, const ParamSpec& spec);
void from_json(const json& j, ParamSpec& spec);

void to_json(json& j, const FunctionDefinition& function);
void from_json(const json& j, FunctionDefinition& function);

FunctionDraft function_draft_from_json(const json& j);
FunctionPatch function_patch_from_json(const json& j);

void to_json(json& j, const Device& device);
void from_json(const json& j, Device& device);

void to_json(json& j, const Deployment& deployment);
void from_json(const json& j, Deployment& deployment);

void to_json(json& j, const AutoDeployRule& rule);
void from_json(const json& j, AutoDeployRule& rule);

} // namespace fnfleet::registry
