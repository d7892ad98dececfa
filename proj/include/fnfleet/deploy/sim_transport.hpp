#pragma once

#include <fnfleet/common/filesystem.hpp>
#include <fnfleet/common/time.hpp>
#include <fnfleet/deploy/transport.hpp>

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fnfleet::deploy {

/// Fixed per-message framing of the in-memory wire: op byte, flags,
/// reserved and a 32-bit length.
inline constexpr std::uint64_t kSimFrameHeader = 8;
/// Path length prefix carried by a file transfer.
inline constexpr std::uint64_t kSimPathPrefix = 2;

enum class WireEvent { Open, Transfer, Read, Execute, Probe, Terminate, Close };

std::string_view to_string(WireEvent event);

/// Splits a rendered command line on whitespace.
std::vector<std::string> split_command(const std::string& command);

/// One simulated device as seen from the transport: a filesystem, a process
/// table and an online switch.
class SimDeviceHost {
public:
    struct Process {
        std::string command;
        bool alive = true;
        std::optional<int> exit_code;
    };

    /// Decides what a launched command does. Returns an exit code if the
    /// process finished immediately, nullopt if it keeps running.
    using Launcher =
        std::function<std::optional<int>(SimDeviceHost& host, const std::string& handle,
                                          const std::vector<std::string>& argv)>;
    using ExitListener = std::function<void(const std::string& handle)>;
    using WireObserver = std::function<void(const registry::Address& host, WireEvent event, std::uint64_t bytes)>;

    explicit SimDeviceHost(registry::Address address, std::shared_ptr<DeviceFilesystem> fs = nullptr);

    const registry::Address& address() const { return address_; }
    DeviceFilesystem& filesystem() { return *fs_; }
    std::shared_ptr<DeviceFilesystem> shared_filesystem() { return fs_; }

    void set_online(bool online) { online_ = online; }
    bool online() const { return online_; }

    /// Credentials a session must present; empty accepts anything.
    void set_expected_credentials(std::string credentials);
    bool accepts(const std::string& credentials) const;

    void set_launcher(Launcher launcher);
    void set_exit_listener(ExitListener listener);
    void add_observer(WireObserver observer);

    /// Wall-clock delay applied to each session operation.
    void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }
    std::chrono::milliseconds latency() const { return latency_; }

    std::string launch(const std::string& command);
    bool is_alive(const std::string& handle) const;
    void terminate(const std::string& handle);
    /// The process dies on its own (exit code 139).
    void crash(const std::string& handle);

    std::map<std::string, Process> processes() const;
    std::vector<std::string> running_handles() const;

    void notify(WireEvent event, std::uint64_t bytes);

    /// Sessions currently open against this host, and the most ever seen at once.
    void session_opened();
    void session_closed();
    int max_concurrent_sessions() const { return max_sessions_; }

private:
    void mark_exited(const std::string& handle, int code);

    registry::Address address_;
    std::shared_ptr<DeviceFilesystem> fs_;
    std::atomic<bool> online_{true};
    std::chrono::milliseconds latency_{0};
    std::string expected_credentials_;

    mutable std::mutex mutex_;
    Launcher launcher_;
    ExitListener exit_listener_;
    std::vector<WireObserver> observers_;
    std::map<std::string, Process> processes_;
    std::uint64_t next_pid_ = 1000;

    std::atomic<int> sessions_{0};
    std::atomic<int> max_sessions_{0};
};

/// Address book of simulated hosts.
class SimFleet {
public:
    /// With auto-provisioning, opening a session to an unknown address
    /// creates a fresh online host for it.
    explicit SimFleet(bool auto_provision = false) : auto_provision_(auto_provision) {}

    std::shared_ptr<SimDeviceHost> add_host(const registry::Address& address,
                                            std::shared_ptr<DeviceFilesystem> fs = nullptr);
    std::shared_ptr<SimDeviceHost> find(const registry::Address& address);
    std::vector<std::shared_ptr<SimDeviceHost>> hosts() const;

    /// Applied to hosts created by auto-provisioning.
    void set_default_launcher(SimDeviceHost::Launcher launcher);

private:
    bool auto_provision_;
    SimDeviceHost::Launcher default_launcher_;
    mutable std::mutex mutex_;
    std::map<registry::Address, std::shared_ptr<SimDeviceHost>> hosts_;
};

class SimTransport : public Transport {
public:
    explicit SimTransport(std::shared_ptr<SimFleet> fleet) : fleet_(std::move(fleet)) {}

    std::unique_ptr<TransportSession> open(const registry::Address& peer, const std::string& credentials) override;

    /// Bytes sent across every session this transport opened.
    std::uint64_t total_bytes_sent() const { return total_bytes_; }

private:
    friend class SimSession;

    std::shared_ptr<SimFleet> fleet_;
    std::atomic<std::uint64_t> total_bytes_{0};
};

} // namespace fnfleet::deploy
