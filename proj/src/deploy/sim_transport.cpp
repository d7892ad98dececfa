#include <fnfleet/deploy/sim_transport.hpp>

#include <fnfleet/common/error.hpp>

#include <algorithm>
#include <sstream>
#include <thread>

namespace fnfleet::deploy {

std::string_view to_string(WireEvent event)
{
    switch (event) {
    case WireEvent::Open: return "open";
    case WireEvent::Transfer: return "transfer";
    case WireEvent::Read: return "read";
    case WireEvent::Execute: return "execute";
    case WireEvent::Probe: return "probe";
    case WireEvent::Terminate: return "terminate";
    case WireEvent::Close: return "close";
    }
    return "unknown";
}

std::vector<std::string> split_command(const std::string& command)
{
    std::istringstream in(command);
    std::vector<std::string> argv;
    for (std::string token; in >> token;) {
        argv.push_back(token);
    }
    return argv;
}

SimDeviceHost::SimDeviceHost(registry::Address address, std::shared_ptr<DeviceFilesystem> fs)
    : address_(std::move(address)), fs_(fs ? std::move(fs) : std::make_shared<MemoryFilesystem>())
{
}

void SimDeviceHost::set_expected_credentials(std::string credentials)
{
    std::lock_guard lock(mutex_);
    expected_credentials_ = std::move(credentials);
}

bool SimDeviceHost::accepts(const std::string& credentials) const
{
    std::lock_guard lock(mutex_);
    return expected_credentials_.empty() || expected_credentials_ == credentials;
}

void SimDeviceHost::set_launcher(Launcher launcher)
{
    std::lock_guard lock(mutex_);
    launcher_ = std::move(launcher);
}

void SimDeviceHost::set_exit_listener(ExitListener listener)
{
    std::lock_guard lock(mutex_);
    exit_listener_ = std::move(listener);
}

void SimDeviceHost::add_observer(WireObserver observer)
{
    std::lock_guard lock(mutex_);
    observers_.push_back(std::move(observer));
}

void SimDeviceHost::notify(WireEvent event, std::uint64_t bytes)
{
    std::vector<WireObserver> observers;
    {
        std::lock_guard lock(mutex_);
        observers = observers_;
    }
    for (const auto& observer : observers) {
        observer(address_, event, bytes);
    }
}

std::string SimDeviceHost::launch(const std::string& command)
{
    std::string handle;
    Launcher launcher;
    {
        std::lock_guard lock(mutex_);
        handle = "sim-pid-" + std::to_string(next_pid_++);
        processes_[handle] = Process{command, true, std::nullopt};
        launcher = launcher_;
    }
    auto argv = split_command(command);
    std::optional<int> exit_code;
    if (launcher) {
        exit_code = launcher(*this, handle, argv);
    } else {
        // Without a behaviour attached, a process lives as long as some
        // argument names a file that exists on the device.
        bool found = std::any_of(argv.begin(), argv.end(), [&](const std::string& arg) { return fs_->exists(arg); });
        if (!found) {
            exit_code = 127;
        }
    }
    if (exit_code) {
        std::lock_guard lock(mutex_);
        processes_[handle].alive = false;
        processes_[handle].exit_code = exit_code;
    }
    return handle;
}

bool SimDeviceHost::is_alive(const std::string& handle) const
{
    std::lock_guard lock(mutex_);
    auto it = processes_.find(handle);
    return it != processes_.end() && it->second.alive;
}

void SimDeviceHost::mark_exited(const std::string& handle, int code)
{
    ExitListener listener;
    {
        std::lock_guard lock(mutex_);
        auto it = processes_.find(handle);
        if (it == processes_.end() || !it->second.alive) {
            return;
        }
        it->second.alive = false;
        it->second.exit_code = code;
        listener = exit_listener_;
    }
    if (listener) {
        listener(handle);
    }
}

void SimDeviceHost::terminate(const std::string& handle)
{
    mark_exited(handle, 143);
}

void SimDeviceHost::crash(const std::string& handle)
{
    mark_exited(handle, 139);
}

std::map<std::string, SimDeviceHost::Process> SimDeviceHost::processes() const
{
    std::lock_guard lock(mutex_);
    return processes_;
}

std::vector<std::string> SimDeviceHost::running_handles() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [handle, process] : processes_) {
        if (process.alive) {
            out.push_back(handle);
        }
    }
    return out;
}

void SimDeviceHost::session_opened()
{
    int now = ++sessions_;
    int seen = max_sessions_.load();
    while (now > seen && !max_sessions_.compare_exchange_weak(seen, now)) {
    }
}

void SimDeviceHost::session_closed()
{
    --sessions_;
}

std::shared_ptr<SimDeviceHost> SimFleet::add_host(const registry::Address& address,
                                                  std::shared_ptr<DeviceFilesystem> fs)
{
    std::lock_guard lock(mutex_);
    auto host = std::make_shared<SimDeviceHost>(address, std::move(fs));
    if (default_launcher_) {
        host->set_launcher(default_launcher_);
    }
    hosts_[address] = host;
    return host;
}

std::shared_ptr<SimDeviceHost> SimFleet::find(const registry::Address& address)
{
    std::lock_guard lock(mutex_);
    auto it = hosts_.find(address);
    if (it != hosts_.end()) {
        return it->second;
    }
    if (!auto_provision_) {
        return nullptr;
    }
    auto host = std::make_shared<SimDeviceHost>(address);
    if (default_launcher_) {
        host->set_launcher(default_launcher_);
    }
    hosts_[address] = host;
    return host;
}

std::vector<std::shared_ptr<SimDeviceHost>> SimFleet::hosts() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::shared_ptr<SimDeviceHost>> out;
    for (const auto& [address, host] : hosts_) {
        out.push_back(host);
    }
    return out;
}

void SimFleet::set_default_launcher(SimDeviceHost::Launcher launcher)
{
    std::lock_guard lock(mutex_);
    default_launcher_ = std::move(launcher);
}

class SimSession : public TransportSession {
public:
    SimSession(std::shared_ptr<SimDeviceHost> host, SimTransport& transport) : host_(std::move(host)), transport_(transport)
    {
        host_->session_opened();
        send(WireEvent::Open, kSimFrameHeader);
    }

    ~SimSession() override
    {
        if (open_) {
            close();
        }
    }

    void write_file(const std::string& path, std::string_view data) override
    {
        check();
        host_->filesystem().write(path, data);
        send(WireEvent::Transfer, kSimFrameHeader + kSimPathPrefix + path.size() + data.size());
    }

    std::string read_file(const std::string& path) override
    {
        check();
        send(WireEvent::Read, kSimFrameHeader + kSimPathPrefix + path.size());
        auto content = host_->filesystem().read(path);
        if (!content) {
            throw TransportError("no such file on " + host_->address().to_string() + ": " + path);
        }
        return *content;
    }

    std::string launch_detached(const std::string& command) override
    {
        check();
        send(WireEvent::Execute, kSimFrameHeader + command.size());
        auto handle = host_->launch(command);
        auto processes = host_->processes();
        const auto& process = processes.at(handle);
        if (!process.alive && process.exit_code.value_or(0) != 0) {
            throw LaunchError("'" + command + "' exited with status " + std::to_string(*process.exit_code));
        }
        return handle;
    }

    bool is_alive(const std::string& handle) override
    {
        check();
        send(WireEvent::Probe, kSimFrameHeader + handle.size());
        return host_->is_alive(handle);
    }

    void terminate(const std::string& handle) override
    {
        check();
        send(WireEvent::Terminate, kSimFrameHeader + handle.size());
        host_->terminate(handle);
    }

    void close() override
    {
        if (!open_) {
            return;
        }
        if (host_->online()) {
            send(WireEvent::Close, kSimFrameHeader);
        }
        open_ = false;
        host_->session_closed();
    }

    bool is_open() const override { return open_; }

    std::uint64_t bytes_sent() const override { return bytes_; }

private:
    void check()
    {
        if (!open_) {
            throw SessionClosed("session to " + host_->address().to_string() + " is closed");
        }
        if (!host_->online()) {
            throw TransportError(host_->address().to_string() + ": connection reset");
        }
        if (host_->latency().count() > 0) {
            std::this_thread::sleep_for(host_->latency());
        }
    }

    void send(WireEvent event, std::uint64_t bytes)
    {
        bytes_ += bytes;
        transport_.total_bytes_ += bytes;
        host_->notify(event, bytes);
    }

    std::shared_ptr<SimDeviceHost> host_;
    SimTransport& transport_;
    bool open_ = true;
    std::uint64_t bytes_ = 0;
};

std::unique_ptr<TransportSession> SimTransport::open(const registry::Address& peer, const std::string& credentials)
{
    auto host = fleet_->find(peer);
    if (!host || !host->online()) {
        throw TransportError(peer.to_string() + ": connection refused");
    }
    if (!host->accepts(credentials)) {
        throw TransportError(peer.to_string() + ": authentication failed");
    }
    return std::make_unique<SimSession>(std::move(host), *this);
}

} // namespace fnfleet::deploy
