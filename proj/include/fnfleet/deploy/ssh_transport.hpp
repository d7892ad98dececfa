#pragma once

#include <fnfleet/deploy/transport.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fnfleet::deploy {

/// JSON map of device address ("host:port") to private key path. A value of
/// the form "user@/path/to/key" also names the login user; an object
/// {"key": ..., "user": ..., "port": ...} can set the SSH port as well.
class CredentialStore {
public:
    struct Entry {
        std::string user;
        std::string key_path;
        int port = 0; // 0: use SshOptions::port
    };

    CredentialStore() = default;
    explicit CredentialStore(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    static CredentialStore load(const std::filesystem::path& file);
    static CredentialStore parse(const std::string& json_text);

    std::optional<Entry> resolve(const std::string& reference) const;

private:
    std::map<std::string, Entry> entries_;
};

struct SshOptions {
    std::string ssh_program = "ssh";
    std::string sftp_program = "sftp";
    std::string default_user = "pi";
    /// The device address names its agent endpoint; SSH listens here instead.
    int port = 22;
    int connect_timeout_s = 10;
    std::filesystem::path control_dir = std::filesystem::temp_directory_path();
};

/// Who and how to reach one device.
struct SshTarget {
    std::string user;
    std::string host;
    int port = 22;
    std::string key_path;
    std::string control_path;
};

std::string shell_quote(std::string_view text);

/// Connection options shared by ssh and sftp (everything but the port flag,
/// which the two programs spell differently).
std::vector<std::string> ssh_connection_options(const SshTarget& target, int connect_timeout_s);

/// Options common to every ssh invocation of one session (multiplexed
/// over a control master).
std::vector<std::string> ssh_common_options(const SshTarget& target, int connect_timeout_s);

/// Remote shell snippet: starts `command` detached, prints `pid:<n>` if it
/// is still alive shortly after, `exit:<code>` otherwise.
std::string detached_launch_script(const std::string& command);

/// Key-based SSH-2 via the OpenSSH client. Files go through the sftp
/// subsystem; commands through exec on a shared control connection.
class SshTransport : public Transport {
public:
    SshTransport(CredentialStore credentials, SshOptions options)
        : credentials_(std::move(credentials)), options_(std::move(options))
    {
    }

    std::unique_ptr<TransportSession> open(const registry::Address& peer, const std::string& credentials) override;

    SshTarget target_for(const registry::Address& peer, const std::string& credentials) const;

private:
    CredentialStore credentials_;
    SshOptions options_;
};

} // namespace fnfleet::deploy
