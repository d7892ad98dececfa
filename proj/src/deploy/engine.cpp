#include <fnfleet/deploy/engine.hpp>

namespace fnfleet::deploy {

namespace {

using registry::DeploymentState;

void advance(registry::Deployment& deployment, DeploymentState next, const TransitionObserver& observer)
{
    if (!registry::is_legal_transition(deployment.state, next)) {
        throw PreconditionError("illegal transition " + std::string(registry::to_string(deployment.state)) + " -> " +
                                std::string(registry::to_string(next)));
    }
    deployment.state = next;
    if (next != DeploymentState::Running) {
        deployment.handle.reset();
    }
    if (observer) {
        observer(deployment);
    }
}

void fail(registry::Deployment& deployment, std::string reason, const TransitionObserver& observer)
{
    deployment.failure_reason = std::move(reason);
    advance(deployment, DeploymentState::Failed, observer);
}

} // namespace

std::shared_ptr<std::mutex> DeploymentEngine::device_mutex(const std::string& device_id)
{
    std::lock_guard lock(locks_mutex_);
    auto& slot = device_locks_[device_id];
    if (!slot) {
        slot = std::make_shared<std::mutex>();
    }
    return slot;
}

DeployOutcome DeploymentEngine::deploy(registry::Deployment deployment, const registry::FunctionDefinition& function,
                                       const registry::Device& device, const TransitionObserver& observer)
{
    if (!registry::is_in_flight(deployment.state)) {
        throw PreconditionError("deploy needs a Requested or Transferred deployment, " + deployment.id + " is " +
                                std::string(registry::to_string(deployment.state)));
    }
    if (function.id != deployment.function_id || function.version != deployment.function_version) {
        throw PreconditionError("deployment " + deployment.id + " pins a different function version");
    }

    auto device_lock = device_mutex(device.id);
    std::lock_guard serial(*device_lock);
    auto started = std::chrono::steady_clock::now();

    DeployOutcome outcome;
    outcome.metrics.deployment_id = deployment.id;
    outcome.metrics.payload_size = function.source.size();
    auto finish = [&]() {
        outcome.metrics.wall_time =
            std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
        outcome.deployment = deployment;
        return outcome;
    };

    LaunchPlan plan;
    try {
        plan = make_launch_plan(function, deployment, device.base_dir.empty() ? default_base_dir_ : device.base_dir);
    } catch (const Error& e) {
        outcome.error = e.code();
        fail(deployment, std::string("render: ") + e.what(), observer);
        return finish();
    }
    deployment.remote_path = plan.remote_path;

    std::unique_ptr<TransportSession> session;
    try {
        session = transport_.open(device.address, device.transport_credentials);
    } catch (const Error& e) {
        outcome.error = e.code();
        outcome.device_unreachable = true;
        fail(deployment, std::string("connect: ") + e.what(), observer);
        return finish();
    }

    try {
        // Overwriting is idempotent, so a Transferred deployment simply re-sends.
        session->write_file(plan.remote_path, plan.payload);
        if (deployment.state == DeploymentState::Requested) {
            advance(deployment, DeploymentState::Transferred, observer);
        }
        auto handle = session->launch_detached(plan.command);
        deployment.handle = handle;
        deployment.failure_reason.reset();
        advance(deployment, DeploymentState::Running, observer);
    } catch (const LaunchError& e) {
        outcome.error = e.code();
        fail(deployment, std::string("launch: ") + e.what(), observer);
    } catch (const Error& e) {
        outcome.error = e.code();
        fail(deployment, std::string("transfer: ") + e.what(), observer);
    }
    try {
        session->close();
    } catch (const Error&) {
    }
    outcome.metrics.bytes_sent = session->bytes_sent();
    return finish();
}

StopOutcome DeploymentEngine::stop(registry::Deployment deployment, const registry::Device& device,
                                   const TransitionObserver& observer)
{
    if (deployment.state != DeploymentState::Running) {
        throw PreconditionError("stop needs a Running deployment, " + deployment.id + " is " +
                                std::string(registry::to_string(deployment.state)));
    }
    auto device_lock = device_mutex(device.id);
    std::lock_guard serial(*device_lock);

    StopOutcome outcome;
    std::unique_ptr<TransportSession> session;
    try {
        session = transport_.open(device.address, device.transport_credentials);
    } catch (const Error&) {
        outcome.device_unreachable = true;
    }
    try {
        if (!session) {
            throw TransportError("open failed");
        }
        session->terminate(*deployment.handle);
        session->close();
        advance(deployment, DeploymentState::Stopped, observer);
    } catch (const Error&) {
        outcome.error = ErrorCode::Transport;
        fail(deployment, "stop-unreachable", observer);
    }
    outcome.deployment = deployment;
    return outcome;
}

ProbeOutcome DeploymentEngine::probe(registry::Deployment deployment, const registry::Device& device,
                                     const TransitionObserver& observer)
{
    if (deployment.state != DeploymentState::Running) {
        throw PreconditionError("probe needs a Running deployment, " + deployment.id + " is " +
                                std::string(registry::to_string(deployment.state)));
    }
    auto device_lock = device_mutex(device.id);
    std::lock_guard serial(*device_lock);

    bool alive = false;
    try {
        auto session = transport_.open(device.address, device.transport_credentials);
        alive = session->is_alive(*deployment.handle);
        session->close();
    } catch (const TransportError&) {
        throw;
    } catch (const Error& e) {
        throw TransportError(std::string("probe failed: ") + e.what());
    }

    ProbeOutcome outcome;
    if (alive) {
        outcome.liveness = Liveness::Alive;
    } else {
        outcome.liveness = Liveness::Dead;
        fail(deployment, "exited", observer);
    }
    outcome.deployment = deployment;
    return outcome;
}

} // namespace fnfleet::deploy
