#include <fnfleet/api/config.hpp>

#include <fnfleet/common/error.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fnfleet::api {

namespace {

std::string trim(std::string_view text)
{
    auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) {
        return {};
    }
    auto end = text.find_last_not_of(" \t\r");
    return std::string(text.substr(begin, end - begin + 1));
}

nlohmann::json parse_toml_value(const std::string& raw, int line)
{
    auto fail = [&](const std::string& why) {
        return ValidationError("config line " + std::to_string(line) + ": " + why);
    };
    if (raw.empty()) {
        throw fail("missing value");
    }
    if (raw.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < raw.size() && raw[i] != '"'; ++i) {
            if (raw[i] == '\\' && i + 1 < raw.size()) {
                char next = raw[++i];
                switch (next) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: throw fail(std::string("unsupported escape \\") + next);
                }
            } else {
                out += raw[i];
            }
        }
        if (i >= raw.size()) {
            throw fail("unterminated string");
        }
        auto rest = trim(std::string_view(raw).substr(i + 1));
        if (!rest.empty() && rest.front() != '#') {
            throw fail("trailing characters after string");
        }
        return out;
    }
    if (raw.front() == '\'') {
        auto close = raw.find('\'', 1);
        if (close == std::string::npos) {
            throw fail("unterminated string");
        }
        return raw.substr(1, close - 1);
    }
    auto value = trim(std::string_view(raw).substr(0, raw.find('#')));
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    if (value.front() == '[' || value.front() == '{') {
        throw fail("arrays and inline tables are not supported");
    }
    std::string digits;
    for (char c : value) {
        if (c != '_') {
            digits += c;
        }
    }
    auto parsed = nlohmann::json::parse(digits, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_number()) {
        throw fail("cannot parse value '" + value + "'");
    }
    return parsed;
}

std::string string_field(const nlohmann::json& j, const char* key)
{
    if (!j.at(key).is_string()) {
        throw ValidationError(std::string("config field '") + key + "' must be a string");
    }
    return j.at(key).get<std::string>();
}

} // namespace

nlohmann::json parse_flat_toml(const std::string& text)
{
    nlohmann::json out = nlohmann::json::object();
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        auto content = trim(line);
        if (content.empty() || content.front() == '#') {
            continue;
        }
        if (content.front() == '[') {
            throw ValidationError("config line " + std::to_string(number) + ": tables are not supported");
        }
        auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(number) + ": expected key = value");
        }
        auto key = trim(std::string_view(content).substr(0, eq));
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"') {
            key = key.substr(1, key.size() - 2);
        }
        if (key.empty()) {
            throw ValidationError("config line " + std::to_string(number) + ": empty key");
        }
        if (out.contains(key)) {
            throw ValidationError("config line " + std::to_string(number) + ": duplicate key " + key);
        }
        out[key] = parse_toml_value(trim(std::string_view(content).substr(eq + 1)), number);
    }
    return out;
}

nlohmann::json read_config_document(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read config file " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (file.extension() == ".json") {
        auto parsed = nlohmann::json::parse(buffer.str(), nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            throw ValidationError("config file " + file.string() + " is not a JSON object");
        }
        return parsed;
    }
    return parse_flat_toml(buffer.str());
}

std::pair<std::string, int> ApiConfig::listen_endpoint() const
{
    auto colon = listen.rfind(':');
    if (colon == std::string::npos || colon == 0) {
        throw ValidationError("listen must be host:port, got '" + listen + "'");
    }
    auto port_text = listen.substr(colon + 1);
    int port = -1;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw ValidationError("bad port in listen address '" + listen + "'");
    }
    return {listen.substr(0, colon), port};
}

void ApiConfig::validate() const
{
    listen_endpoint();
    if (storage.empty()) {
        throw ValidationError("storage path is empty");
    }
    if (admin_token.empty()) {
        throw ValidationError("admin_token must be set");
    }
    if (transport != "ssh" && transport != "simulated") {
        throw ValidationError("transport must be \"ssh\" or \"simulated\", got \"" + transport + "\"");
    }
    if (default_base_dir.empty() || default_base_dir.front() != '/') {
        throw ValidationError("default_base_dir must be an absolute path");
    }
}

ApiConfig ApiConfig::from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ValidationError("config must be an object");
    }
    ApiConfig config;
    for (const auto& [key, value] : j.items()) {
        if (key == "listen") {
            config.listen = string_field(j, "listen");
        } else if (key == "storage") {
            config.storage = string_field(j, "storage");
        } else if (key == "credentials_file") {
            config.credentials_file = string_field(j, "credentials_file");
        } else if (key == "notifier_url") {
            config.notifier_url = string_field(j, "notifier_url");
        } else if (key == "admin_token") {
            config.admin_token = string_field(j, "admin_token");
        } else if (key == "transport") {
            config.transport = string_field(j, "transport");
        } else if (key == "default_base_dir") {
            config.default_base_dir = string_field(j, "default_base_dir");
        } else if (key == "compact_after") {
            if (!value.is_number_unsigned()) {
                throw ValidationError("compact_after must be a non-negative integer");
            }
            config.compact_after = value.get<std::size_t>();
        } else {
            throw ValidationError("unknown config key '" + key + "'");
        }
    }
    return config;
}

ApiConfig ApiConfig::load(const std::filesystem::path& file)
{
    return from_json(read_config_document(file));
}

void ApiConfig::apply_environment(const std::function<std::optional<std::string>(const char*)>& getenv)
{
    if (auto v = getenv("FNFLEET_LISTEN")) {
        listen = *v;
    }
    if (auto v = getenv("FNFLEET_STORAGE")) {
        storage = *v;
    }
    if (auto v = getenv("FNFLEET_ADMIN_TOKEN")) {
        admin_token = *v;
    }
    if (auto v = getenv("FNFLEET_NOTIFIER_URL")) {
        notifier_url = *v;
    }
}

void ApiConfig::apply_environment()
{
    apply_environment([](const char* name) -> std::optional<std::string> {
        const char* value = std::getenv(name);
        if (value == nullptr) {
            return std::nullopt;
        }
        return std::string(value);
    });
}

} // namespace fnfleet::api
