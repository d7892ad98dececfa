#include <fnfleet/api/router.hpp>

#include <fnfleet/registry/codec.hpp>
#include <fnfleet/rules/rule.hpp>
#include <fnfleet/rules/telemetry.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <vector>

namespace fnfleet::api {

using nlohmann::json;

int http_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Validation:
    case ErrorCode::Binding:
    case ErrorCode::UnresolvedPlaceholder:
    case ErrorCode::UnsafeValue:
    case ErrorCode::MalformedBatch:
    case ErrorCode::Usage: return 400;
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownDevice:
    case ErrorCode::UnknownAction: return 404;
    case ErrorCode::InUse:
    case ErrorCode::Precondition: return 409;
    case ErrorCode::Transport:
    case ErrorCode::SessionClosed:
    case ErrorCode::Launch:
    case ErrorCode::Connection: return 502;
    case ErrorCode::RegistrationExhausted: return 503;
    case ErrorCode::HandlerFailure:
    case ErrorCode::Scenario:
    case ErrorCode::Storage: return 500;
    }
    return 500;
}

namespace {

struct MethodNotAllowed {};

net::Response json_response(int status, const json& body)
{
    return net::Response{status, body.dump(), "application/json"};
}

net::Response error_response(ErrorCode code, const std::string& message)
{
    return json_response(http_status(code), json{{"error", to_string(code)}, {"message", message}});
}

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::string current;
    for (char c : path) {
        if (c == '/') {
            if (!current.empty()) {
                parts.push_back(std::move(current));
                current.clear();
            }
        } else {
            current += c;
        }
    }
    if (!current.empty()) {
        parts.push_back(std::move(current));
    }
    return parts;
}

json parse_body(const net::Request& request)
{
    auto body = json::parse(request.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        throw ValidationError("request body must be a JSON object");
    }
    return body;
}

const json& require(const json& body, const char* key)
{
    if (!body.contains(key)) {
        throw ValidationError(std::string("missing field '") + key + "'");
    }
    return body.at(key);
}

std::string require_string(const json& body, const char* key)
{
    const auto& value = require(body, key);
    if (!value.is_string()) {
        throw ValidationError(std::string("field '") + key + "' must be a string");
    }
    return value.get<std::string>();
}

std::vector<registry::Capability> parse_capabilities(const json& body)
{
    std::vector<registry::Capability> out;
    if (!body.contains("capabilities")) {
        return out;
    }
    const auto& list = body.at("capabilities");
    if (!list.is_array()) {
        throw ValidationError("capabilities must be an array of strings");
    }
    for (const auto& entry : list) {
        if (!entry.is_string()) {
            throw ValidationError("capabilities must be an array of strings");
        }
        out.push_back(registry::Capability::parse(entry.get<std::string>()));
    }
    return out;
}

json device_view(const registry::Device& device, const std::vector<registry::Deployment>& deployments)
{
    json j = device;
    j["deployments"] = deployments;
    return j;
}

std::optional<std::string> query_param(const net::Request& request, const std::string& key)
{
    auto it = request.query.find(key);
    if (it == request.query.end() || it->second.empty()) {
        return std::nullopt;
    }
    return it->second;
}

} // namespace

bool Router::authorized(const net::Request& request) const
{
    return !admin_token_.empty() && request.header("Authorization") == "Bearer " + admin_token_;
}

net::Response Router::route(const net::Request& request)
{
    try {
        return dispatch(request);
    } catch (const MethodNotAllowed&) {
        return json_response(405, json{{"error", "method-not-allowed"},
                                       {"message", request.method + " is not allowed on " + request.path}});
    } catch (const Error& e) {
        return error_response(e.code(), e.what());
    } catch (const json::exception& e) {
        return error_response(ErrorCode::Validation, e.what());
    } catch (const std::exception& e) {
        return json_response(500, json{{"error", "internal"}, {"message", e.what()}});
    }
}

net::Response Router::dispatch(const net::Request& request)
{
    const auto parts = split_path(request.path);
    const auto& method = request.method;
    auto& registry = plane_.registry();
    auto& pipeline = plane_.pipeline();

    if (parts.empty()) {
        throw NotFound("no route for " + request.path);
    }
    const auto& root = parts[0];

    // device-facing
    if (root == "devices" && parts.size() == 1 && method == "POST") {
        auto body = parse_body(request);
        auto address = registry::Address::parse(require_string(body, "address"));
        std::optional<std::string> base_dir;
        if (body.contains("base_dir")) {
            base_dir = require_string(body, "base_dir");
        }
        auto result = plane_.register_device(address, parse_capabilities(body), base_dir);
        std::vector<std::string> ids;
        for (const auto& d : result.deployments) {
            ids.push_back(d.id);
        }
        return json_response(201, json{{"device_id", result.device.id},
                                       {"status", registry::to_string(result.device.status)},
                                       {"deployments", ids}});
    }
    if (root == "telemetry" && parts.size() == 1 && method == "POST") {
        auto batch = rules::batch_from_json(parse_body(request));
        auto report = pipeline.ingest_telemetry(std::move(batch));
        return json_response(202, json{{"stored", report.stored}});
    }

    static const std::vector<std::string> kKnownRoots{"devices", "telemetry", "functions", "deployments", "rules"};
    if (std::find(kKnownRoots.begin(), kKnownRoots.end(), root) == kKnownRoots.end()) {
        throw NotFound("no route for " + request.path);
    }
    if (!authorized(request)) {
        throw Unauthorized("admin token required");
    }

    if (root == "devices") {
        if (parts.size() != 1) {
            throw NotFound("no route for " + request.path);
        }
        if (method != "GET") {
            throw MethodNotAllowed{};
        }
        std::optional<registry::DeviceStatus> status;
        if (auto text = query_param(request, "status")) {
            status = registry::parse_device_status(*text);
        }
        auto devices = status == registry::DeviceStatus::Pending ? registry.list_pending_devices()
                                                                  : registry.list_devices(status);
        json out = json::array();
        for (const auto& device : devices) {
            out.push_back(device_view(device, registry.list_deployments(device.id)));
        }
        return json_response(200, out);
    }

    if (root == "telemetry") {
        if (parts.size() != 1) {
            throw NotFound("no route for " + request.path);
        }
        if (method != "GET") {
            throw MethodNotAllowed{};
        }
        auto device = query_param(request, "device");
        auto metric = query_param(request, "metric");
        if (!device || !metric) {
            throw ValidationError("device and metric are required");
        }
        auto from = query_param(request, "from") ? parse_iso8601(*query_param(request, "from")) : Timestamp::min();
        auto to = query_param(request, "to") ? parse_iso8601(*query_param(request, "to")) : Timestamp::max();
        if (from > to) {
            throw ValidationError("from is after to");
        }
        return json_response(200, pipeline.query_telemetry(*device, *metric, from, to));
    }

    if (root == "functions") {
        if (parts.size() == 1) {
            if (method == "GET") {
                return json_response(200, registry.list_functions());
            }
            if (method == "POST") {
                return json_response(201, registry.create_function(registry::function_draft_from_json(parse_body(request))));
            }
            throw MethodNotAllowed{};
        }
        if (parts.size() != 2) {
            throw NotFound("no route for " + request.path);
        }
        const auto& id = parts[1];
        if (method == "GET") {
            return json_response(200, registry.get_function(id));
        }
        if (method == "PUT") {
            return json_response(200, registry.update_function(id, registry::function_patch_from_json(parse_body(request))));
        }
        if (method == "DELETE") {
            registry.delete_function(id);
            return net::Response{204, "", "application/json"};
        }
        throw MethodNotAllowed{};
    }

    if (root == "deployments") {
        if (parts.size() == 1) {
            if (method != "POST") {
                throw MethodNotAllowed{};
            }
            auto body = parse_body(request);
            registry::Bindings bindings;
            if (body.contains("bindings")) {
                bindings = registry::bindings_from_json(body.at("bindings"));
            }
            return json_response(
                201, plane_.assign(require_string(body, "device_id"), require_string(body, "function_id"), bindings));
        }
        if (parts.size() == 3 && parts[2] == "stop") {
            if (method != "POST") {
                throw MethodNotAllowed{};
            }
            return json_response(200, plane_.stop(parts[1]));
        }
        throw NotFound("no route for " + request.path);
    }

    // rules
    if (parts.size() < 2 || parts.size() > 3 || (parts[1] != "interop" && parts[1] != "autodeploy")) {
        throw NotFound("no route for " + request.path);
    }
    const bool interop = parts[1] == "interop";
    if (parts.size() == 2) {
        if (method == "GET") {
            return interop ? json_response(200, pipeline.list_rules())
                           : json_response(200, registry.list_autodeploy_rules());
        }
        if (method == "POST") {
            auto body = parse_body(request);
            if (interop) {
                return json_response(201, pipeline.create_rule(rules::rule_from_json(body)));
            }
            auto draft = body.get<registry::AutoDeployRule>();
            return json_response(201, registry.create_autodeploy_rule(draft.capability_predicate, draft.function_id,
                                                                      draft.binding_template));
        }
        throw MethodNotAllowed{};
    }
    const auto& id = parts[2];
    if (method == "GET") {
        return interop ? json_response(200, pipeline.get_rule(id)) : json_response(200, registry.get_autodeploy_rule(id));
    }
    if (method == "DELETE") {
        if (interop) {
            pipeline.delete_rule(id);
        } else {
            registry.delete_autodeploy_rule(id);
        }
        return net::Response{204, "", "application/json"};
    }
    throw MethodNotAllowed{};
}

} // namespace fnfleet::api
