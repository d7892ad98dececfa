#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace fnfleet::api {

struct ApiConfig {
    /// host:port the HTTP service binds to.
    std::string listen = "127.0.0.1:8080";
    /// Directory holding the journal and snapshot.
    std::filesystem::path storage = "fnfleet-data";
    /// JSON map of device address to SSH key; see CredentialStore.
    std::filesystem::path credentials_file;
    std::string notifier_url;
    std::string admin_token;
    /// "ssh" or "simulated".
    std::string transport = "ssh";
    std::string default_base_dir = "/opt/fnfleet";
    std::size_t compact_after = 10000;

    /// Host and port of `listen`; port 0 binds an ephemeral port.
    std::pair<std::string, int> listen_endpoint() const;

    /// Throws ValidationError describing the first bad field.
    void validate() const;

    /// Unknown keys are rejected.
    static ApiConfig from_json(const nlohmann::json& j);

    /// `.json` files are JSON; anything else is read as flat TOML
    /// (`key = value` lines). A missing file throws UsageError.
    static ApiConfig load(const std::filesystem::path& file);

    /// FNFLEET_LISTEN, FNFLEET_STORAGE, FNFLEET_ADMIN_TOKEN and
    /// FNFLEET_NOTIFIER_URL override the file.
    void apply_environment(const std::function<std::optional<std::string>(const char*)>& getenv);
    void apply_environment();
};

/// Top-level `key = value` pairs of a TOML document: strings, integers,
/// floats and booleans. Tables and arrays raise ValidationError.
nlohmann::json parse_flat_toml(const std::string& text);

/// Reads a JSON or flat TOML file into a JSON object.
nlohmann::json read_config_document(const std::filesystem::path& file);

} // namespace fnfleet::api
