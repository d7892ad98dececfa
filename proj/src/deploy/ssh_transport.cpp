#include <fnfleet/deploy/ssh_transport.hpp>

#include <fnfleet/common/error.hpp>
#include <fnfleet/common/process.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <fstream>
#include <functional>
#include <sstream>

#include <unistd.h>

namespace fnfleet::deploy {

namespace {

CredentialStore::Entry parse_entry(const nlohmann::json& value)
{
    CredentialStore::Entry entry;
    if (value.is_string()) {
        auto text = value.get<std::string>();
        if (auto at = text.find('@'); at != std::string::npos && at != 0 && text.find('/') > at) {
            entry.user = text.substr(0, at);
            entry.key_path = text.substr(at + 1);
        } else {
            entry.key_path = text;
        }
    } else if (value.is_object()) {
        entry.key_path = value.at("key").get<std::string>();
        entry.user = value.value("user", "");
        entry.port = value.value("port", 0);
    } else {
        throw ValidationError("credential entries must be strings or objects");
    }
    if (entry.key_path.empty()) {
        throw ValidationError("credential entry has an empty key path");
    }
    return entry;
}

std::string temp_file_name()
{
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path();
    return (dir / ("fnfleet-" + std::to_string(::getpid()) + "-" + std::to_string(counter++))).string();
}

class SshSession : public TransportSession {
public:
    SshSession(SshTarget target, SshOptions options) : target_(std::move(target)), options_(std::move(options))
    {
        auto args = ssh_common_options(target_, options_.connect_timeout_s);
        args.insert(args.end(), {"-o", "ControlMaster=yes", "-o", "ControlPersist=yes", "-f", "-N", destination()});
        auto result = run(options_.ssh_program, args, {});
        if (result.exit_code != 0) {
            throw TransportError("ssh to " + destination() + " failed: " + trim(result.err));
        }
        open_ = true;
    }

    ~SshSession() override
    {
        try {
            close();
        } catch (...) {
        }
    }

    void write_file(const std::string& path, std::string_view data) override
    {
        check();
        auto slash = path.rfind('/');
        if (slash != std::string::npos && slash > 0) {
            exec("mkdir -p " + shell_quote(path.substr(0, slash)));
        }
        auto local = temp_file_name();
        {
            std::ofstream out(local, std::ios::binary);
            out.write(data.data(), static_cast<std::streamsize>(data.size()));
        }
        std::string batch = "put " + local + " " + path + "\n";
        auto result = sftp(batch);
        std::filesystem::remove(local);
        if (result.exit_code != 0) {
            throw TransportError("sftp put to " + destination() + ":" + path + " failed: " + trim(result.err));
        }
        bytes_ += data.size() + batch.size();
    }

    std::string read_file(const std::string& path) override
    {
        check();
        auto local = temp_file_name();
        std::string batch = "get " + path + " " + local + "\n";
        auto result = sftp(batch);
        if (result.exit_code != 0) {
            throw TransportError("sftp get " + path + " failed: " + trim(result.err));
        }
        std::ifstream in(local, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::filesystem::remove(local);
        return content;
    }

    std::string launch_detached(const std::string& command) override
    {
        check();
        auto out = trim(exec(detached_launch_script(command)).out);
        if (out.rfind("pid:", 0) == 0) {
            return out.substr(4);
        }
        if (out.rfind("exit:", 0) == 0) {
            auto code = out.substr(5);
            if (code == "0") {
                return "exited";
            }
            throw LaunchError("'" + command + "' exited with status " + code);
        }
        throw TransportError("unexpected launch reply from " + destination() + ": " + out);
    }

    bool is_alive(const std::string& handle) override
    {
        check();
        return exec_status("kill -0 " + shell_quote(handle) + " 2>/dev/null") == 0;
    }

    void terminate(const std::string& handle) override
    {
        check();
        exec_status("kill " + shell_quote(handle) + " 2>/dev/null");
    }

    void close() override
    {
        if (!open_) {
            return;
        }
        open_ = false;
        auto args = ssh_common_options(target_, options_.connect_timeout_s);
        args.insert(args.end(), {"-O", "exit", destination()});
        run(options_.ssh_program, args, {});
    }

    bool is_open() const override { return open_; }

    std::uint64_t bytes_sent() const override { return bytes_; }

private:
    static std::string trim(std::string text)
    {
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) {
            text.pop_back();
        }
        return text;
    }

    std::string destination() const { return target_.user + "@" + target_.host; }

    void check() const
    {
        if (!open_) {
            throw SessionClosed("session to " + destination() + " is closed");
        }
    }

    ProcessResult run(const std::string& program, const std::vector<std::string>& args, std::string_view input)
    {
        try {
            return run_process(program, args, input);
        } catch (const std::system_error& e) {
            throw TransportError("cannot run " + program + ": " + e.what());
        }
    }

    ProcessResult exec(const std::string& remote_command)
    {
        auto args = ssh_common_options(target_, options_.connect_timeout_s);
        args.push_back(destination());
        args.push_back(remote_command);
        bytes_ += remote_command.size();
        auto result = run(options_.ssh_program, args, {});
        if (result.exit_code == 255) {
            throw TransportError("ssh exec on " + destination() + " failed: " + trim(result.err));
        }
        return result;
    }

    int exec_status(const std::string& remote_command) { return exec(remote_command).exit_code; }

    ProcessResult sftp(const std::string& batch)
    {
        std::vector<std::string> args = {"-b", "-", "-P", std::to_string(target_.port)};
        auto options = ssh_connection_options(target_, options_.connect_timeout_s);
        args.insert(args.end(), options.begin(), options.end());
        args.push_back(destination());
        return run(options_.sftp_program, args, batch);
    }

    SshTarget target_;
    SshOptions options_;
    bool open_ = false;
    std::uint64_t bytes_ = 0;
};

} // namespace

CredentialStore CredentialStore::parse(const std::string& json_text)
{
    auto doc = nlohmann::json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ValidationError("credentials file must be a JSON object");
    }
    std::map<std::string, Entry> entries;
    for (const auto& [address, value] : doc.items()) {
        entries[address] = parse_entry(value);
    }
    return CredentialStore(std::move(entries));
}

CredentialStore CredentialStore::load(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw ValidationError("cannot read credentials file " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

std::optional<CredentialStore::Entry> CredentialStore::resolve(const std::string& reference) const
{
    auto it = entries_.find(reference);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::string shell_quote(std::string_view text)
{
    std::string out = "'";
    for (char c : text) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

std::vector<std::string> ssh_connection_options(const SshTarget& target, int connect_timeout_s)
{
    return {"-o", "BatchMode=yes",
            "-o", "StrictHostKeyChecking=accept-new",
            "-o", "ConnectTimeout=" + std::to_string(connect_timeout_s),
            "-o", "ControlPath=" + target.control_path,
            "-i", target.key_path};
}

std::vector<std::string> ssh_common_options(const SshTarget& target, int connect_timeout_s)
{
    auto args = ssh_connection_options(target, connect_timeout_s);
    args.insert(args.end(), {"-p", std::to_string(target.port)});
    return args;
}

std::string detached_launch_script(const std::string& command)
{
    return "nohup sh -c " + shell_quote(command) +
           " >/dev/null 2>&1 </dev/null & pid=$!; sleep 1; "
           "if kill -0 $pid 2>/dev/null; then echo pid:$pid; else wait $pid; echo exit:$?; fi";
}

SshTarget SshTransport::target_for(const registry::Address& peer, const std::string& credentials) const
{
    auto entry = credentials_.resolve(credentials);
    if (!entry) {
        throw TransportError("no SSH credentials for " + credentials);
    }
    SshTarget target;
    target.user = entry->user.empty() ? options_.default_user : entry->user;
    target.host = peer.host;
    target.port = entry->port != 0 ? entry->port : options_.port;
    target.key_path = entry->key_path;
    auto tag = std::to_string(std::hash<std::string>{}(target.user + "@" + peer.to_string()));
    target.control_path = (options_.control_dir / ("fnfleet-ssh-" + tag)).string();
    return target;
}

std::unique_ptr<TransportSession> SshTransport::open(const registry::Address& peer, const std::string& credentials)
{
    return std::make_unique<SshSession>(target_for(peer, credentials), options_);
}

} // namespace fnfleet::deploy
