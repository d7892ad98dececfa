#include <fnfleet/registry/validation.hpp>

#include <fnfleet/common/error.hpp>

#include <cctype>
#include <set>

namespace fnfleet::registry {

bool is_identifier(std::string_view text)
{
    if (text.empty() || !(std::isalpha(static_cast<unsigned char>(text[0])) || text[0] == '_')) {
        return false;
    }
    for (char c : text) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
            return false;
        }
    }
    return true;
}

std::vector<Placeholder> scan_placeholders(std::string_view text)
{
    std::vector<Placeholder> found;
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string_view::npos) {
        auto close = text.find('}', pos + 1);
        if (close == std::string_view::npos) {
            break;
        }
        auto inner = text.substr(pos + 1, close - pos - 1);
        if (is_identifier(inner)) {
            found.push_back(Placeholder{std::string(inner), pos, close - pos + 1});
            pos = close + 1;
        } else {
            ++pos;
        }
    }
    return found;
}

void validate_function(const FunctionDraft& draft)
{
    if (draft.name.empty()) {
        throw ValidationError("function name must not be empty");
    }
    std::set<std::string> names;
    for (const auto& param : draft.params) {
        if (!is_identifier(param.name)) {
            throw ValidationError("parameter name '" + param.name + "' is not an identifier");
        }
        if (param.name == kFilePlaceholder) {
            throw ValidationError("parameter name 'file' is reserved for the script path");
        }
        if (!names.insert(param.name).second) {
            throw ValidationError("duplicate parameter name '" + param.name + "'");
        }
        if (param.required && param.default_value) {
            throw ValidationError("required parameter '" + param.name + "' cannot carry a default");
        }
        if (param.default_value && !value_matches(param.kind, *param.default_value)) {
            throw ValidationError("default of '" + param.name + "' does not match kind " +
                                  std::string(to_string(param.kind)));
        }
    }
    if (!draft.extension.empty() && !is_identifier(draft.extension)) {
        throw ValidationError("extension must be alphanumeric: '" + draft.extension + "'");
    }

    int file_tokens = 0;
    for (const auto& placeholder : scan_placeholders(draft.interpreter_template)) {
        if (placeholder.name == kFilePlaceholder) {
            ++file_tokens;
        } else if (names.count(placeholder.name) == 0) {
            throw ValidationError("placeholder '" + placeholder.name + "' names no declared parameter");
        }
    }
    if (file_tokens != 1) {
        throw ValidationError("interpreter template needs exactly one {file} placeholder, found " +
                              std::to_string(file_tokens));
    }
}

Bindings resolve_bindings(const FunctionDefinition& function, const Bindings& raw)
{
    for (const auto& [name, value] : raw) {
        if (function.find_param(name) == nullptr) {
            throw BindingError("'" + name + "' is not a parameter of " + function.name);
        }
    }
    Bindings resolved;
    for (const auto& param : function.params) {
        auto it = raw.find(param.name);
        if (it == raw.end()) {
            if (param.required) {
                throw BindingError("required parameter '" + param.name + "' is not bound");
            }
            if (param.default_value) {
                resolved[param.name] = *param.default_value;
            }
            continue;
        }
        if (!value_matches(param.kind, it->second)) {
            throw BindingError("parameter '" + param.name + "' expects " + std::string(to_string(param.kind)));
        }
        if (param.kind == ParamKind::Real && std::holds_alternative<std::int64_t>(it->second)) {
            resolved[param.name] = static_cast<double>(std::get<std::int64_t>(it->second));
        } else {
            resolved[param.name] = it->second;
        }
    }
    return resolved;
}

} // namespace fnfleet::registry
