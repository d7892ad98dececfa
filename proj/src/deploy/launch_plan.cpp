#include <fnfleet/deploy/launch_plan.hpp>

#include <fnfleet/common/error.hpp>
#include <fnfleet/registry/validation.hpp>

#include <cctype>
#include <charconv>
#include <cmath>

namespace fnfleet::deploy {

namespace {

std::string render_value(const std::string& name, const registry::ParamValue& value)
{
    if (const auto* i = std::get_if<std::int64_t>(&value)) {
        return std::to_string(*i);
    }
    if (const auto* d = std::get_if<double>(&value)) {
        if (!std::isfinite(*d)) {
            throw UnsafeValue("parameter '" + name + "' is not a finite number");
        }
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), *d, std::chars_format::fixed);
        return std::string(buf, ptr);
    }
    if (const auto* b = std::get_if<bool>(&value)) {
        return *b ? "true" : "false";
    }
    const auto& text = std::get<std::string>(value);
    if (!is_shell_safe(text)) {
        throw UnsafeValue("parameter '" + name + "' holds characters unsafe for an unquoted shell word");
    }
    return text;
}

} // namespace

bool is_shell_safe(std::string_view token)
{
    if (token.empty()) {
        return false;
    }
    for (char c : token) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' || c == '/' ||
                  c == ':' || c == '=' || c == '@' || c == '+' || c == ',' || c == '%';
        if (!ok) {
            return false;
        }
    }
    return true;
}

std::string render_command(const registry::FunctionDefinition& function, const registry::Bindings& bindings,
                           std::string_view remote_path)
{
    if (remote_path.empty()) {
        throw ValidationError("remote path must not be empty");
    }
    if (!is_shell_safe(remote_path)) {
        throw UnsafeValue("remote path '" + std::string(remote_path) + "' is not shell safe");
    }
    const auto& text = function.interpreter_template;
    std::string out;
    std::size_t cursor = 0;
    for (const auto& placeholder : registry::scan_placeholders(text)) {
        out.append(text, cursor, placeholder.offset - cursor);
        if (placeholder.name == registry::kFilePlaceholder) {
            out += remote_path;
        } else {
            auto it = bindings.find(placeholder.name);
            if (it == bindings.end()) {
                throw UnresolvedPlaceholder("no value for placeholder {" + placeholder.name + "}");
            }
            out += render_value(placeholder.name, it->second);
        }
        cursor = placeholder.offset + placeholder.length;
    }
    out.append(text, cursor, std::string::npos);
    return out;
}

std::string remote_path_for(const registry::FunctionDefinition& function, const registry::Deployment& deployment,
                            std::string_view base_dir)
{
    std::string dir(base_dir);
    while (dir.size() > 1 && dir.back() == '/') {
        dir.pop_back();
    }
    std::string path = dir + (dir == "/" ? "" : "/") + function.id + "-" + deployment.id;
    if (!function.extension.empty()) {
        path += "." + function.extension;
    }
    return path;
}

LaunchPlan make_launch_plan(const registry::FunctionDefinition& function, const registry::Deployment& deployment,
                            std::string_view base_dir)
{
    LaunchPlan plan;
    plan.remote_path = remote_path_for(function, deployment, base_dir);
    plan.command = render_command(function, deployment.bindings, plan.remote_path);
    plan.payload = function.source;
    plan.payload_size = plan.payload.size();
    return plan;
}

} // namespace fnfleet::deploy
