#pragma once

#include <fnfleet/deploy/engine.hpp>
#include <fnfleet/net/message.hpp>
#include <fnfleet/registry/registry.hpp>
#include <fnfleet/rules/pipeline.hpp>

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace fnfleet::api {

/// Discovery steps as the control plane takes them: "register", then
/// "auto-match" or "pending".
using DiscoveryObserver =
    std::function<void(const registry::Device& device, std::string_view step)>;

struct DeviceRegistration {
    registry::Device device;
    registry::RegistrationBranch branch = registry::RegistrationBranch::Pending;
    /// Every deployment the registration created, after the engine ran it.
    std::vector<registry::Deployment> deployments;
    std::vector<registry::SkippedRule> skipped;
};

struct ControlPlaneOptions {
    std::string notifier_url;
    std::string default_base_dir = "/opt/fnfleet";
};

/// The control plane: registry, deployment engine and telemetry pipeline
/// wired together. Deployments triggered here run synchronously.
class ControlPlane {
public:
    ControlPlane(std::shared_ptr<registry::Store> store, deploy::Transport& transport, net::Client& client,
                 ControlPlaneOptions options, TimeSource clock);

    registry::Registry& registry() { return registry_; }
    const registry::Registry& registry() const { return registry_; }
    rules::TelemetryPipeline& pipeline() { return pipeline_; }
    deploy::DeploymentEngine& engine() { return engine_; }

    /// Registers (or re-registers) a device and deploys whatever the
    /// auto-deploy rules produced. A failed session open marks the device
    /// Unreachable.
    DeviceRegistration register_device(const registry::Address& address,
                                       std::vector<registry::Capability> capabilities,
                                       std::optional<std::string> base_dir = std::nullopt);

    /// Administrator assignment; a deployment reaching Running records the
    /// manual activation.
    registry::Deployment assign(const std::string& device_id, const std::string& function_id,
                                const registry::Bindings& bindings);

    registry::Deployment stop(const std::string& deployment_id);

    /// Throws TransportError (after marking the device Unreachable) if the
    /// device cannot be reached.
    deploy::ProbeOutcome probe(const std::string& deployment_id);

    void set_discovery_observer(DiscoveryObserver observer);

    /// Metrics of every deploy attempt, in completion order.
    std::vector<deploy::DeploymentMetrics> deployment_metrics() const;

private:
    registry::Deployment run_deploy(const registry::Deployment& deployment);
    void emit(const registry::Device& device, std::string_view step);

    std::shared_ptr<registry::Store> store_;
    registry::Registry registry_;
    deploy::DeploymentEngine engine_;
    rules::TelemetryPipeline pipeline_;

    mutable std::mutex mutex_;
    DiscoveryObserver observer_;
    std::vector<deploy::DeploymentMetrics> metrics_;
};

} // namespace fnfleet::api
