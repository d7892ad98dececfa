#include <fnfleet/sim/simulator.hpp>

#include <fnfleet/agent/agent.hpp>
#include <fnfleet/api/control_plane.hpp>
#include <fnfleet/api/router.hpp>
#include <fnfleet/common/error.hpp>
#include <fnfleet/deploy/sim_transport.hpp>
#include <fnfleet/net/sim_network.hpp>
#include <fnfleet/registry/codec.hpp>
#include <fnfleet/registry/store.hpp>
#include <fnfleet/sim/bundled.hpp>

#include <algorithm>
#include <map>
#include <queue>
#include <random>

namespace fnfleet::sim {

using nlohmann::json;
using registry::DeploymentState;

namespace {

constexpr const char* kControlPlane = "control-plane:8080";
constexpr const char* kNotifier = "notifier:9999";
constexpr const char* kAdminToken = "sim-admin";

struct MotionWindow {
    Timestamp from;
    Timestamp to;
};

class Simulation {
public:
    Simulation(const Scenario& scenario, ClockMode mode);
    ScenarioReport run();

private:
    struct Device {
        DeviceSpec spec;
        std::shared_ptr<deploy::SimDeviceHost> host;
        std::unique_ptr<agent::DeviceAgent> agent;
        std::vector<MotionWindow> motion;
        std::vector<std::string> log;
    };

    struct Item {
        Timestamp at;
        std::uint64_t seq;
        std::function<void()> run;
    };
    struct Later {
        bool operator()(const Item& a, const Item& b) const
        {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    void schedule(Timestamp at, std::function<void()> fn);
    json admin(const std::string& method, const std::string& path, const json& body = nullptr);

    void install();
    void boot(Device& device);
    void install_rule(const RuleSpec& rule);
    void play(const EventSpec& event);

    std::optional<int> launch(Device& device, const std::string& handle, const std::vector<std::string>& argv);
    void motion_tick(const std::string& name, const std::string& handle, Duration interval);
    void flush_tick(const std::string& name);
    void series_tick(const std::string& name, std::string metric, Duration every, Timestamp until, double base,
                     double jitter);

    Device& device(const std::string& name);
    std::string device_id(const std::string& name);
    std::vector<registry::Deployment> live_deployments(const std::string& name, const std::string& function_key);

    json build_report() const;
    json summarize(const json& report) const;

    const Scenario& scenario_;
    SimClock clock_;
    net::SimNetwork network_;
    std::shared_ptr<deploy::SimFleet> fleet_;
    deploy::SimTransport transport_;
    std::shared_ptr<registry::MemoryStore> store_;
    std::unique_ptr<api::ControlPlane> plane_;
    std::unique_ptr<api::Router> router_;
    Timestamp end_;

    std::map<std::string, Device> devices_;
    std::map<std::string, std::string> name_by_address_;
    std::map<std::string, std::string> function_ids_;
    std::map<std::string, std::string> function_keys_;
    std::map<std::string, std::string> rule_ids_;
    std::map<std::string, std::string> rule_names_;
    std::vector<json> notifications_;
    std::mt19937_64 rng_;

    std::priority_queue<Item, std::vector<Item>, Later> queue_;
    std::uint64_t next_seq_ = 0;
};

Simulation::Simulation(const Scenario& scenario, ClockMode mode)
    : scenario_(scenario), clock_(mode), fleet_(std::make_shared<deploy::SimFleet>(false)), transport_(fleet_),
      store_(std::make_shared<registry::MemoryStore>()), end_(clock_.at(scenario.run_until)), rng_(scenario.seed)
{
    plane_ = std::make_unique<api::ControlPlane>(
        store_, transport_, network_,
        api::ControlPlaneOptions{std::string("http://") + kNotifier + "/notify", "/opt/fnfleet"}, clock_.source());
    router_ = std::make_unique<api::Router>(*plane_, kAdminToken);
    network_.attach(kControlPlane, router_->handler());
    network_.attach(kNotifier, [this](const net::Request& request) {
        notifications_.push_back(json::parse(request.body, nullptr, false));
        return net::Response{200, "{}", "application/json"};
    });
    plane_->set_discovery_observer([this](const registry::Device& d, std::string_view step) {
        auto it = name_by_address_.find(d.address.to_string());
        if (it != name_by_address_.end()) {
            devices_.at(it->second).log.emplace_back(step);
        }
    });
    for (const auto& spec : scenario_.devices) {
        name_by_address_[spec.address] = spec.name;
        devices_[spec.name].spec = spec;
    }
}

void Simulation::schedule(Timestamp at, std::function<void()> fn)
{
    queue_.push(Item{at, next_seq_++, std::move(fn)});
}

json Simulation::admin(const std::string& method, const std::string& path, const json& body)
{
    net::Request request;
    request.method = method;
    request.path = path;
    request.headers["Authorization"] = std::string("Bearer ") + kAdminToken;
    request.headers["Content-Type"] = "application/json";
    if (!body.is_null()) {
        request.body = body.dump();
    }
    auto response = network_.send(kControlPlane, request);
    if (response.status >= 300) {
        throw ScenarioError(method + " " + path + " answered " + std::to_string(response.status) + ": " +
                            response.body);
    }
    return response.body.empty() ? json(nullptr) : json::parse(response.body);
}

Simulation::Device& Simulation::device(const std::string& name)
{
    auto it = devices_.find(name);
    if (it == devices_.end()) {
        throw ScenarioError("unknown device " + name);
    }
    return it->second;
}

std::string Simulation::device_id(const std::string& name)
{
    auto& d = device(name);
    auto id = d.agent ? d.agent->device_id() : std::nullopt;
    if (!id) {
        throw ScenarioError("device " + name + " is not registered");
    }
    return *id;
}

std::vector<registry::Deployment> Simulation::live_deployments(const std::string& name,
                                                               const std::string& function_key)
{
    auto function_id = function_ids_.at(function_key);
    std::vector<registry::Deployment> out;
    for (const auto& d : plane_->registry().list_deployments(device_id(name))) {
        if (d.function_id == function_id && d.state == DeploymentState::Running) {
            out.push_back(d);
        }
    }
    return out;
}

void Simulation::install()
{
    for (const auto& f : scenario_.functions) {
        json params = json::array();
        for (const auto& p : f.draft.params) {
            params.push_back(p);
        }
        auto created = admin("POST", "/functions",
                             json{{"name", f.draft.name},
                                  {"source", f.draft.source},
                                  {"interpreter_template", f.draft.interpreter_template},
                                  {"params", params},
                                  {"extension", f.draft.extension}});
        function_ids_[f.key] = created.at("id").get<std::string>();
        function_keys_[created.at("id").get<std::string>()] = f.key;
    }
    for (const auto& a : scenario_.autodeploy) {
        admin("POST", "/rules/autodeploy",
              json{{"capability_predicate", a.capabilities},
                   {"function_id", function_ids_.at(a.function)},
                   {"binding_template", a.bindings}});
    }
    for (const auto& spec : scenario_.devices) {
        auto name = spec.name;
        schedule(clock_.at(spec.boot_at), [this, name] { boot(devices_.at(name)); });
    }
    for (const auto& rule : scenario_.rules) {
        schedule(clock_.at(rule.install_at), [this, &rule] { install_rule(rule); });
    }
    for (const auto& event : scenario_.events) {
        schedule(clock_.at(event.at), [this, &event] { play(event); });
    }
}

void Simulation::boot(Device& d)
{
    const auto name = d.spec.name;
    auto address = registry::Address::parse(d.spec.address);
    if (!d.host) {
        d.host = fleet_->add_host(address, std::make_shared<MemoryFilesystem>());
        d.host->set_launcher([this, name](deploy::SimDeviceHost&, const std::string& handle,
                                          const std::vector<std::string>& argv) {
            return launch(devices_.at(name), handle, argv);
        });
        d.host->set_exit_listener([this, name](const std::string& handle) {
            devices_.at(name).agent->unregister_group(handle);
        });
        d.host->add_observer([this, name](const registry::Address&, deploy::WireEvent event, std::uint64_t) {
            if (event == deploy::WireEvent::Transfer) {
                devices_.at(name).log.emplace_back("transfer");
            } else if (event == deploy::WireEvent::Execute) {
                devices_.at(name).log.emplace_back("execute");
            }
        });
    }

    agent::AgentConfig config;
    config.control_plane = std::string("http://") + kControlPlane;
    config.address = d.spec.address;
    config.capabilities = d.spec.capabilities;
    config.base_dir = d.spec.base_dir;
    config.retry_budget = 3;
    agent::Sleeper sleeper;
    if (clock_.mode() == ClockMode::Virtual) {
        sleeper = [](Duration) {};
    }
    d.agent = std::make_unique<agent::DeviceAgent>(config, network_, sleeper);
    network_.attach(d.spec.address, d.agent->handler());
    try {
        d.agent->boot_register();
    } catch (const Error& e) {
        throw ScenarioError("device " + name + " failed to register: " + e.what());
    }
    auto first_flush = clock_.now() + seconds_to_duration(d.spec.flush_interval);
    if (first_flush <= end_) {
        schedule(first_flush, [this, name] { flush_tick(name); });
    }
}

void Simulation::flush_tick(const std::string& name)
{
    auto& d = devices_.at(name);
    d.agent->flush_telemetry();
    auto next = clock_.now() + seconds_to_duration(d.spec.flush_interval);
    if (next <= end_) {
        schedule(next, [this, name] { flush_tick(name); });
    }
}

std::optional<int> Simulation::launch(Device& d, const std::string& handle, const std::vector<std::string>& argv)
{
    std::size_t file_index = argv.size();
    std::optional<std::string> source;
    for (std::size_t i = 0; i < argv.size(); ++i) {
        if ((source = d.host->filesystem().read(argv[i]))) {
            file_index = i;
            break;
        }
    }
    if (!source) {
        return 127;
    }
    auto marker = parse_sim_marker(*source);
    if (!marker) {
        return std::nullopt;
    }
    std::map<std::string, std::string> args;
    for (std::size_t k = 0; k < marker->args.size() && file_index + 1 + k < argv.size(); ++k) {
        args[marker->args[k]] = argv[file_index + 1 + k];
    }

    const auto name = d.spec.name;
    if (marker->behaviour == "motion-monitor") {
        double interval = 10;
        try {
            if (args.count("interval")) {
                interval = std::stod(args["interval"]);
            }
        } catch (const std::exception&) {
            return 2;
        }
        if (!(interval > 0)) {
            return 2;
        }
        auto step = seconds_to_duration(interval);
        schedule(clock_.now(), [this, name, handle, step] { motion_tick(name, handle, step); });
    } else if (marker->behaviour == "camera-recorder") {
        d.agent->register_handler("record", agent::make_record_handler(d.host->shared_filesystem(), d.spec.base_dir),
                                  handle);
    } else if (marker->behaviour == "relay-control") {
        d.agent->register_handler("on", agent::make_relay_handler(d.host->shared_filesystem(), d.spec.base_dir, true),
                                  handle);
        d.agent->register_handler("off",
                                  agent::make_relay_handler(d.host->shared_filesystem(), d.spec.base_dir, false), handle);
    }
    return std::nullopt;
}

void Simulation::motion_tick(const std::string& name, const std::string& handle, Duration interval)
{
    auto& d = devices_.at(name);
    if (!d.host->is_alive(handle)) {
        return;
    }
    auto now = clock_.now();
    bool moving = std::any_of(d.motion.begin(), d.motion.end(),
                              [&](const MotionWindow& w) { return w.from <= now && now < w.to; });
    d.agent->emit_telemetry("motion", {rules::Sample{now, moving ? 1.0 : 0.0}});
    if (now + interval <= end_) {
        schedule(now + interval, [this, name, handle, interval] { motion_tick(name, handle, interval); });
    }
}

void Simulation::series_tick(const std::string& name, std::string metric, Duration every, Timestamp until,
                             double base, double jitter)
{
    auto now = clock_.now();
    std::uniform_real_distribution<double> noise(-jitter, jitter);
    double value = jitter > 0 ? base + noise(rng_) : base;
    devices_.at(name).agent->emit_telemetry(metric, {rules::Sample{now, value}});
    auto next = now + every;
    if (next <= until && next <= end_) {
        schedule(next, [this, name, metric, every, until, base, jitter] {
            series_tick(name, metric, every, until, base, jitter);
        });
    }
}

void Simulation::install_rule(const RuleSpec& rule)
{
    json body = rule.body;
    try {
        auto& condition = body.at("condition");
        if (condition.contains("source")) {
            auto source = condition.at("source").get<std::string>();
            if (!devices_.count(source)) {
                throw ScenarioError("rule " + rule.name + " names unknown device " + source);
            }
            condition["source_device_id"] = device_id(source);
            condition.erase("source");
        }
        for (auto& action : body.at("actions")) {
            if (action.contains("target")) {
                auto target = action.at("target").get<std::string>();
                if (!devices_.count(target)) {
                    throw ScenarioError("rule " + rule.name + " names unknown device " + target);
                }
                action["target_device_id"] = device_id(target);
                action.erase("target");
            }
        }
    } catch (const json::exception& e) {
        throw ScenarioError("rule " + rule.name + " is malformed: " + e.what());
    }
    auto created = admin("POST", "/rules/interop", body);
    rule_ids_[rule.name] = created.at("id").get<std::string>();
    rule_names_[created.at("id").get<std::string>()] = rule.name;
}

void Simulation::play(const EventSpec& event)
{
    const auto& data = event.data;
    const auto& type = event.type;
    auto now = clock_.now();
    auto name = data.value("device", "");

    if (type == "motion") {
        auto duration = seconds_to_duration(data.value("duration", 1.0));
        device(name).motion.push_back(MotionWindow{now, now + duration});
    } else if (type == "sample") {
        device(name).agent->emit_telemetry(data.at("metric").get<std::string>(),
                                           {rules::Sample{now, data.at("value").get<double>()}});
    } else if (type == "series") {
        auto every = seconds_to_duration(data.value("every", 1.0));
        if (every <= Duration::zero()) {
            throw ScenarioError("series needs a positive 'every'");
        }
        auto until = clock_.at(data.value("until", scenario_.run_until));
        series_tick(name, data.at("metric").get<std::string>(), every, until, data.value("base", 0.0),
                    data.value("jitter", 0.0));
    } else if (type == "assign") {
        admin("POST", "/deployments",
              json{{"device_id", device_id(name)},
                   {"function_id", function_ids_.at(data.at("function").get<std::string>())},
                   {"bindings", data.value("bindings", json::object())}});
    } else if (type == "stop") {
        for (const auto& d : live_deployments(name, data.at("function").get<std::string>())) {
            admin("POST", "/deployments/" + d.id + "/stop", json::object());
        }
    } else if (type == "restart") {
        try {
            device(name).agent->restart();
        } catch (const Error& e) {
            throw ScenarioError("device " + name + " failed to re-register: " + e.what());
        }
    } else if (type == "crash") {
        for (const auto& d : live_deployments(name, data.at("function").get<std::string>())) {
            device(name).host->crash(*d.handle);
        }
    } else if (type == "probe") {
        for (const auto& d : plane_->registry().list_deployments(device_id(name))) {
            if (d.state != DeploymentState::Running) {
                continue;
            }
            try {
                plane_->probe(d.id);
            } catch (const TransportError&) {
            }
        }
    } else if (type == "offline" || type == "online") {
        bool online = type == "online";
        auto& d = device(name);
        d.host->set_online(online);
        network_.set_down(d.spec.address, !online);
    } else if (type == "delete_rule") {
        auto rule = data.at("rule").get<std::string>();
        auto it = rule_ids_.find(rule);
        if (it == rule_ids_.end()) {
            throw ScenarioError("rule " + rule + " was never installed");
        }
        admin("DELETE", "/rules/interop/" + it->second);
        rule_ids_.erase(it);
    }
}

json Simulation::build_report() const
{
    json report;
    report["scenario"] = scenario_.name;
    report["seed"] = scenario_.seed;
    report["clock"] = clock_.mode() == ClockMode::Virtual ? "virtual" : "wall";
    report["final_time"] = clock_.units_since_epoch(clock_.now());

    auto& registry = plane_->registry();
    std::map<std::string, std::string> name_by_id;
    json devices = json::array();
    for (const auto& spec : scenario_.devices) {
        const auto& d = devices_.at(spec.name);
        json entry{{"name", spec.name}, {"address", spec.address}, {"message_log", d.log}};
        auto id = d.agent ? d.agent->device_id() : std::nullopt;
        if (id) {
            name_by_id[*id] = spec.name;
            auto record = registry.get_device(*id);
            entry["device_id"] = *id;
            entry["status"] = registry::to_string(record.status);
            json deployments = json::array();
            for (const auto& dep : registry.list_deployments(*id)) {
                json row{{"id", dep.id},
                         {"function", function_keys_.count(dep.function_id) ? function_keys_.at(dep.function_id)
                                                                             : dep.function_id},
                         {"state", registry::to_string(dep.state)},
                         {"bindings", json(dep).at("bindings")}};
                if (dep.failure_reason) {
                    row["failure_reason"] = *dep.failure_reason;
                }
                deployments.push_back(row);
            }
            entry["deployments"] = deployments;
        } else {
            entry["status"] = "not-booted";
            entry["deployments"] = json::array();
        }
        json recordings = json::array();
        std::string relay = "unset";
        if (d.host) {
            for (const auto& path : d.host->filesystem().list(spec.base_dir + "/recordings/")) {
                auto content = d.host->filesystem().read(path);
                recordings.push_back(json{{"path", path},
                                          {"duration", static_cast<double>(content->size()) /
                                                           agent::kRecordingBytesPerUnit}});
            }
            if (auto state = d.host->filesystem().read(spec.base_dir + "/relay.state")) {
                relay = *state;
            }
        }
        entry["recordings"] = recordings;
        entry["relay"] = relay;
        entry["dropped_samples"] = d.agent ? d.agent->dropped_samples() : 0;
        devices.push_back(entry);
    }
    report["devices"] = devices;
    report["device_records"] = registry.list_devices().size();

    auto display = [&](const std::string& rule_id) {
        auto it = rule_names_.find(rule_id);
        return it == rule_names_.end() ? rule_id : it->second;
    };
    json outcomes = json::array();
    json firings = json::array();
    for (const auto& outcome : plane_->pipeline().outcomes()) {
        json o = outcome;
        o["rule"] = display(outcome.rule_id);
        outcomes.push_back(o);
        if (outcome.action_index == 0) {
            firings.push_back(json{{"rule", display(outcome.rule_id)},
                                   {"at", clock_.units_since_epoch(outcome.fired_at)}});
        }
    }
    json suppressed = json::array();
    for (const auto& s : plane_->pipeline().suppressions()) {
        suppressed.push_back(json{{"rule", display(s.rule_id)}, {"at", clock_.units_since_epoch(s.event_time)}});
    }
    report["outcomes"] = outcomes;
    report["firings"] = firings;
    report["suppressed"] = suppressed;
    report["notifications"] = notifications_;
    report["telemetry_samples"] = plane_->pipeline().telemetry().total_samples();

    json metrics = json::array();
    for (const auto& m : plane_->deployment_metrics()) {
        metrics.push_back(json{{"deployment_id", m.deployment_id},
                               {"payload_bytes", m.payload_size},
                               {"framing_bytes", m.framing_bytes()},
                               {"total_bytes", m.bytes_sent}});
    }
    report["transfers"] = metrics;
    report["summary"] = summarize(report);
    return report;
}

json Simulation::summarize(const json& report) const
{
    json summary;
    std::size_t recordings = 0;
    std::set<double> durations;
    json per_device = json::object();
    json status = json::object();
    json logs = json::object();
    json running = json::object();
    json relay = json::object();
    json registrations = json::object();
    for (const auto& d : report.at("devices")) {
        auto name = d.at("name").get<std::string>();
        per_device[name] = d.at("recordings").size();
        recordings += d.at("recordings").size();
        for (const auto& r : d.at("recordings")) {
            durations.insert(r.at("duration").get<double>());
        }
        status[name] = d.at("status");
        logs[name] = d.at("message_log");
        relay[name] = d.at("relay");
        std::size_t live = 0;
        for (const auto& dep : d.at("deployments")) {
            live += dep.at("state") == "running" ? 1 : 0;
        }
        running[name] = live;
        registrations[name] = std::count(d.at("message_log").begin(), d.at("message_log").end(), json("register"));
    }
    summary["recordings"] = recordings;
    summary["recordings_per_device"] = per_device;
    summary["recording_duration"] = durations.size() == 1 ? json(*durations.begin()) : json(nullptr);
    summary["notifications"] = report.at("notifications").size();
    json texts = json::array();
    for (const auto& n : report.at("notifications")) {
        texts.push_back(n.value("text", ""));
    }
    summary["notification_texts"] = texts;
    summary["firings"] = report.at("firings").size();
    summary["suppressed"] = report.at("suppressed").size();
    std::size_t failures = 0;
    for (const auto& o : report.at("outcomes")) {
        failures += o.at("status") == "failed" ? 1 : 0;
    }
    summary["action_failures"] = failures;
    summary["device_records"] = report.at("device_records");
    summary["device_status"] = status;
    summary["message_log"] = logs;
    summary["running_deployments"] = running;
    summary["relay"] = relay;
    summary["registrations"] = registrations;
    summary["telemetry_samples"] = report.at("telemetry_samples");
    summary["deployments"] = report.at("transfers").size();
    return summary;
}

ScenarioReport Simulation::run()
{
    install();
    while (!queue_.empty()) {
        auto item = queue_.top();
        queue_.pop();
        if (item.at > end_) {
            break;
        }
        clock_.advance_to(item.at);
        item.run();
    }
    clock_.advance_to(end_);

    ScenarioReport out;
    out.report = build_report();
    out.failures = check_expectations(scenario_.expect, out.report.at("summary"));
    out.report["passed"] = out.failures.empty();
    out.report["failures"] = out.failures;
    return out;
}

void compare(const std::string& path, const json& expected, const json& actual, std::vector<std::string>& out)
{
    if (expected.is_object()) {
        if (!actual.is_object()) {
            out.push_back(path + ": expected an object, got " + actual.dump());
            return;
        }
        for (const auto& [key, value] : expected.items()) {
            if (!actual.contains(key)) {
                out.push_back(path + "." + key + ": expected " + value.dump() + ", got nothing");
                continue;
            }
            compare(path + "." + key, value, actual.at(key), out);
        }
        return;
    }
    if (expected != actual) {
        out.push_back(path + ": expected " + expected.dump() + ", got " + actual.dump());
    }
}

} // namespace

std::vector<std::string> check_expectations(const json& expect, const json& summary)
{
    std::vector<std::string> failures;
    for (const auto& [key, value] : expect.items()) {
        if (!summary.contains(key)) {
            failures.push_back(key + ": not a known expectation");
            continue;
        }
        compare(key, value, summary.at(key), failures);
    }
    return failures;
}

ScenarioReport run_scenario(const Scenario& scenario, ClockMode mode)
{
    Simulation simulation(scenario, mode);
    return simulation.run();
}

void require_passed(const ScenarioReport& report)
{
    if (report.passed()) {
        return;
    }
    std::string message = "scenario expectations not met:";
    for (const auto& failure : report.failures) {
        message += "\n  " + failure;
    }
    throw ScenarioError(message);
}

} // namespace fnfleet::sim
