#pragma once

#include <fnfleet/common/ids.hpp>
#include <fnfleet/common/time.hpp>
#include <fnfleet/registry/store.hpp>
#include <fnfleet/registry/types.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fnfleet::registry {

/// Which side of the discovery decision a registration landed on.
enum class RegistrationBranch {
    Deploy,  ///< at least one deployment is attached to the device
    Pending, ///< nothing to run; the device waits in the pending list
};

struct SkippedRule {
    std::string rule_id;
    std::string reason;
};

struct RegistrationResult {
    Device device;
    bool newly_created = false;
    RegistrationBranch branch = RegistrationBranch::Pending;
    /// Deployments created by this call, all in state Requested.
    std::vector<Deployment> created;
    /// Live deployments the device already had; re-registration leaves them alone.
    std::vector<Deployment> retained;
    /// Rules whose predicate matched but whose bindings could not be built.
    std::vector<SkippedRule> skipped;
};

/// Authoritative store of functions, devices, deployments and auto-deploy
/// rules. Every public operation is linearizable: one mutex orders them and
/// each mutation is written through to the Store before it returns.
class Registry {
public:
    Registry(std::shared_ptr<Store> store, TimeSource clock);

    FunctionDefinition create_function(const FunctionDraft& draft);
    FunctionDefinition update_function(const std::string& id, const FunctionPatch& patch);
    /// Refuses with InUseError while a Running deployment or an auto-deploy
    /// rule references the function.
    void delete_function(const std::string& id);
    FunctionDefinition get_function(const std::string& id) const;
    /// A specific historical version, as pinned by deployments.
    FunctionDefinition get_function_version(const std::string& id, std::int64_t version) const;
    std::vector<FunctionDefinition> list_functions() const;

    /// Address-keyed: a known address keeps its device id, gets its
    /// capabilities replaced and keeps its live deployments.
    RegistrationResult register_device(const Address& address, std::vector<Capability> capabilities,
                                       std::optional<std::string> base_dir = std::nullopt);
    Device get_device(const std::string& id) const;
    std::optional<Device> find_device_by_address(const Address& address) const;
    std::vector<Device> list_devices(std::optional<DeviceStatus> status = std::nullopt) const;
    /// Devices in status Pending, oldest registration first.
    std::vector<Device> list_pending_devices() const;

    /// Creates a Requested deployment of the function's current version.
    Deployment assign_deployment(const std::string& device_id, const std::string& function_id,
                                 const Bindings& bindings);

    /// Stores a new state of an existing deployment. A state change must be a
    /// legal edge; the device status is reconciled afterwards.
    Deployment commit_deployment(const Deployment& updated);
    Deployment get_deployment(const std::string& id) const;
    std::vector<Deployment> list_deployments(std::optional<std::string> device_id = std::nullopt) const;

    /// Records a successful administrator assignment on the device.
    void mark_manually_activated(const std::string& device_id);
    /// A transport session to the device could not be opened.
    void mark_unreachable(const std::string& device_id);

    AutoDeployRule create_autodeploy_rule(std::set<std::string> capability_predicate, const std::string& function_id,
                                          std::map<std::string, TemplateValue> binding_template);
    AutoDeployRule get_autodeploy_rule(const std::string& id) const;
    std::vector<AutoDeployRule> list_autodeploy_rules() const;
    void delete_autodeploy_rule(const std::string& id);

    bool device_exists(const std::string& id) const;

private:
    struct FunctionRecord {
        std::vector<FunctionDefinition> versions; // oldest first
        const FunctionDefinition& latest() const { return versions.back(); }
    };

    void load();
    void persist_function(const std::string& id) const;
    void persist_device(const Device& device) const;
    void persist_deployment(const Deployment& deployment) const;
    const FunctionRecord& function_record(const std::string& id) const;
    Device& device_ref(const std::string& id);
    void reconcile_locked(Device& device);
    std::optional<Bindings> bindings_for_rule(const AutoDeployRule& rule, const std::vector<Capability>& capabilities,
                                              std::string& reason) const;

    std::shared_ptr<Store> store_;
    TimeSource clock_;
    mutable std::mutex mutex_;

    std::map<std::string, FunctionRecord> functions_;
    std::map<std::string, Device> devices_;
    std::map<std::string, std::string> device_by_address_;
    std::map<std::string, Deployment> deployments_;
    std::map<std::string, AutoDeployRule> autodeploy_rules_;

    IdSequence function_ids_{"fn"};
    IdSequence device_ids_{"dev"};
    IdSequence deployment_ids_{"dep"};
    IdSequence rule_ids_{"adr"};
};

} // namespace fnfleet::registry
