#pragma once

#include <fnfleet/registry/types.hpp>

#include <string>
#include <string_view>

namespace fnfleet::deploy {

/// Everything needed to start one deployment on its device.
struct LaunchPlan {
    std::string remote_path;
    std::string command;
    std::string payload;
    std::size_t payload_size = 0;
};

/// Characters allowed in an unquoted string argument. Anything else
/// (whitespace, quotes, `;`, `|`, `$`, ...) is rejected, never quoted.
bool is_shell_safe(std::string_view token);

/// Substitutes `{file}` with `remote_path` and every `{param}` with its
/// binding: numbers in decimal, booleans as true/false, strings verbatim
/// after the safety check. Throws UnresolvedPlaceholder or UnsafeValue.
std::string render_command(const registry::FunctionDefinition& function, const registry::Bindings& bindings,
                           std::string_view remote_path);

/// `<base_dir>/<function-id>-<deployment-id>[.<ext>]`.
std::string remote_path_for(const registry::FunctionDefinition& function, const registry::Deployment& deployment,
                            std::string_view base_dir);

LaunchPlan make_launch_plan(const registry::FunctionDefinition& function, const registry::Deployment& deployment,
                            std::string_view base_dir);

} // namespace fnfleet::deploy
