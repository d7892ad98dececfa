#include <fnfleet/api/control_plane.hpp>

#include <fnfleet/common/error.hpp>

namespace fnfleet::api {

using registry::Deployment;
using registry::DeploymentState;

ControlPlane::ControlPlane(std::shared_ptr<registry::Store> store, deploy::Transport& transport, net::Client& client,
                           ControlPlaneOptions options, TimeSource clock)
    : store_(store), registry_(store, clock), engine_(transport, options.default_base_dir),
      pipeline_(
          store, client, [this](const std::string& id) { return registry_.device_exists(id); },
          [this](const std::string& id) -> std::optional<std::string> {
              try {
                  return registry_.get_device(id).address.to_string();
              } catch (const NotFound&) {
                  return std::nullopt;
              }
          },
          options.notifier_url, clock)
{
}

void ControlPlane::set_discovery_observer(DiscoveryObserver observer)
{
    std::lock_guard lock(mutex_);
    observer_ = std::move(observer);
}

void ControlPlane::emit(const registry::Device& device, std::string_view step)
{
    DiscoveryObserver observer;
    {
        std::lock_guard lock(mutex_);
        observer = observer_;
    }
    if (observer) {
        observer(device, step);
    }
}

std::vector<deploy::DeploymentMetrics> ControlPlane::deployment_metrics() const
{
    std::lock_guard lock(mutex_);
    return metrics_;
}

Deployment ControlPlane::run_deploy(const Deployment& deployment)
{
    auto device = registry_.get_device(deployment.device_id);
    auto function = registry_.get_function_version(deployment.function_id, deployment.function_version);
    auto outcome = engine_.deploy(deployment, function, device,
                                  [this](const Deployment& step) { registry_.commit_deployment(step); });
    {
        std::lock_guard lock(mutex_);
        metrics_.push_back(outcome.metrics);
    }
    if (outcome.device_unreachable) {
        registry_.mark_unreachable(device.id);
    }
    return outcome.deployment;
}

DeviceRegistration ControlPlane::register_device(const registry::Address& address,
                                                 std::vector<registry::Capability> capabilities,
                                                 std::optional<std::string> base_dir)
{
    auto result = registry_.register_device(address, std::move(capabilities), std::move(base_dir));
    emit(result.device, "register");
    emit(result.device, result.branch == registry::RegistrationBranch::Deploy ? "auto-match" : "pending");

    DeviceRegistration out;
    out.branch = result.branch;
    out.skipped = result.skipped;
    for (const auto& created : result.created) {
        out.deployments.push_back(run_deploy(created));
    }
    // a deployment interrupted before Running resumes on the next boot
    for (const auto& retained : result.retained) {
        if (registry::is_in_flight(retained.state)) {
            run_deploy(retained);
        }
    }
    out.device = registry_.get_device(result.device.id);
    return out;
}

Deployment ControlPlane::assign(const std::string& device_id, const std::string& function_id,
                                const registry::Bindings& bindings)
{
    auto requested = registry_.assign_deployment(device_id, function_id, bindings);
    auto finished = run_deploy(requested);
    if (finished.state == DeploymentState::Running) {
        registry_.mark_manually_activated(device_id);
    }
    return finished;
}

Deployment ControlPlane::stop(const std::string& deployment_id)
{
    auto deployment = registry_.get_deployment(deployment_id);
    auto device = registry_.get_device(deployment.device_id);
    auto outcome =
        engine_.stop(deployment, device, [this](const Deployment& step) { registry_.commit_deployment(step); });
    if (outcome.device_unreachable) {
        registry_.mark_unreachable(device.id);
    }
    return outcome.deployment;
}

deploy::ProbeOutcome ControlPlane::probe(const std::string& deployment_id)
{
    auto deployment = registry_.get_deployment(deployment_id);
    auto device = registry_.get_device(deployment.device_id);
    try {
        return engine_.probe(deployment, device,
                             [this](const Deployment& step) { registry_.commit_deployment(step); });
    } catch (const TransportError&) {
        registry_.mark_unreachable(device.id);
        throw;
    }
}

} // namespace fnfleet::api
