#pragma once

#include <fnfleet/registry/types.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace fnfleet::registry {

inline constexpr std::string_view kFilePlaceholder = "file";

/// One `{name}` token inside an interpreter template.
struct Placeholder {
    std::string name;
    std::size_t offset = 0; // position of the opening brace
    std::size_t length = 0; // including both braces
};

/// Finds every `{identifier}` token. Braces that do not enclose an
/// identifier are literal text.
std::vector<Placeholder> scan_placeholders(std::string_view text);

bool is_identifier(std::string_view text);

/// Throws ValidationError if the draft breaks a FunctionDefinition invariant.
void validate_function(const FunctionDraft& draft);

/// Checks `raw` against the function's parameters and fills defaults.
/// Integers are accepted for real parameters and widened. Throws BindingError
/// for a missing required parameter, a kind mismatch or an undeclared name.
Bindings resolve_bindings(const FunctionDefinition& function, const Bindings& raw);

} // namespace fnfleet::registry
