#pragma once

#include <fnfleet/registry/types.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fnfleet::sim {

/// Raw bytes of a file from the functions/ directory, empty if unknown.
std::string_view embedded_file(std::string_view name);

/// Ready-to-create definitions of the shipped functions: "motion-monitor",
/// "camera-recorder" and "relay-control".
std::optional<registry::FunctionDraft> bundled_function(std::string_view key);
std::vector<std::string> bundled_function_keys();

/// A script's `# fnfleet-sim: <behaviour> [args=a,b]` line, which tells the
/// simulator what the script does and how to read its arguments.
struct SimMarker {
    std::string behaviour;
    std::vector<std::string> args;
};

std::optional<SimMarker> parse_sim_marker(std::string_view source);

} // namespace fnfleet::sim
