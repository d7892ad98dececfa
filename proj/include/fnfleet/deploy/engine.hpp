#pragma once

#include <fnfleet/common/error.hpp>
#include <fnfleet/deploy/launch_plan.hpp>
#include <fnfleet/deploy/transport.hpp>
#include <fnfleet/registry/types.hpp>

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace fnfleet::deploy {

struct DeploymentMetrics {
    std::string deployment_id;
    std::size_t payload_size = 0;
    /// Everything the session sent, payload included.
    std::uint64_t bytes_sent = 0;
    std::chrono::microseconds wall_time{0};

    std::uint64_t framing_bytes() const { return bytes_sent > payload_size ? bytes_sent - payload_size : 0; }
};

struct DeployOutcome {
    registry::Deployment deployment;
    DeploymentMetrics metrics;
    /// The session could not be opened at all.
    bool device_unreachable = false;
    std::optional<ErrorCode> error;
};

struct StopOutcome {
    registry::Deployment deployment;
    bool device_unreachable = false;
    std::optional<ErrorCode> error;
};

enum class Liveness { Alive, Dead };

struct ProbeOutcome {
    Liveness liveness = Liveness::Alive;
    registry::Deployment deployment;
};

/// Called with every intermediate state so the caller can persist it.
using TransitionObserver = std::function<void(const registry::Deployment&)>;

/// Drives deployments through the transport. At most one operation per
/// device runs at a time; different devices proceed in parallel.
class DeploymentEngine {
public:
    explicit DeploymentEngine(Transport& transport, std::string default_base_dir = "/opt/fnfleet")
        : transport_(transport), default_base_dir_(std::move(default_base_dir))
    {
    }

    /// Requested (or Transferred, after an interruption) -> Running, or Failed
    /// with a reason. Throws PreconditionError for any other starting state.
    DeployOutcome deploy(registry::Deployment deployment, const registry::FunctionDefinition& function,
                         const registry::Device& device, const TransitionObserver& observer = {});

    /// Running -> Stopped. An unreachable device yields Failed("stop-unreachable").
    StopOutcome stop(registry::Deployment deployment, const registry::Device& device,
                     const TransitionObserver& observer = {});

    /// Checks the handle; a dead process moves the deployment to Failed("exited").
    /// Throws TransportError if the device cannot be reached.
    ProbeOutcome probe(registry::Deployment deployment, const registry::Device& device,
                       const TransitionObserver& observer = {});

    const std::string& default_base_dir() const { return default_base_dir_; }

private:
    std::shared_ptr<std::mutex> device_mutex(const std::string& device_id);

    Transport& transport_;
    std::string default_base_dir_;
    std::mutex locks_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> device_locks_;
};

} // namespace fnfleet::deploy
