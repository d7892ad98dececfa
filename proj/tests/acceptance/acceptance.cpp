// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any failed.
#include "support/durability.hpp"
#include "support/fixtures.hpp"
#include "support/rule_sweep.hpp"
#include "support/serve_process.hpp"

#include <fnfleet/agent/agent.hpp>
#include <fnfleet/api/control_plane.hpp>
#include <fnfleet/api/router.hpp>
#include <fnfleet/common/process.hpp>
#include <fnfleet/deploy/sim_transport.hpp>
#include <fnfleet/net/http.hpp>
#include <fnfleet/net/sim_network.hpp>
#include <fnfleet/sim/bundled.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

using namespace fnfleet;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string scenario(const std::string& name)
{
    return std::string(FNFLEET_SCENARIO_DIR) + "/" + name;
}

/// Each check returns a one-line detail and throws on failure.
struct Failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw Failed(what);
    }
}

json run_scenario_cli(const std::string& file, int& exit_code, double& seconds)
{
    auto start = Clock::now();
    auto r = run_process(FNFLEET_CLI_PATH, {"scenario", "run", scenario(file), "--virtual-clock"});
    seconds = seconds_since(start);
    exit_code = r.exit_code;
    return json::parse(r.out);
}

std::string smart_home()
{
    int code = -1;
    double seconds = 0;
    auto report = run_scenario_cli("smart-home.json", code, seconds);
    const auto& s = report.at("summary");
    require(code == 0, "exit status " + std::to_string(code));
    require(seconds < 10, "took " + std::to_string(seconds) + " s");
    require(s["recordings"] == 2, "recordings " + s["recordings"].dump());
    require(s["recording_duration"] == 5, "recording duration " + s["recording_duration"].dump());
    require(s["notifications"] == 1, "webhooks " + s["notifications"].dump());
    require(s["firings"] == 1, "firings " + s["firings"].dump());
    std::ostringstream detail;
    detail << "exit 0 in " << seconds << " s, 2 recordings of 5, 1 webhook, " << s["suppressed"]
           << " suppressed in cooldown";
    return detail.str();
}

std::string payload_economy()
{
    testing::ManualClock clock;
    auto fleet = std::make_shared<deploy::SimFleet>(true);
    deploy::SimTransport transport(fleet);
    net::SimNetwork network;
    api::ControlPlane plane(std::make_shared<registry::MemoryStore>(), transport, network, api::ControlPlaneOptions{},
                            clock.source());
    auto fn = plane.registry().create_function(*sim::bundled_function("motion-monitor"));
    require(fn.source.size() == 1024, "payload is " + std::to_string(fn.source.size()) + " bytes");
    plane.registry().create_autodeploy_rule({"pir-motion"}, fn.id, {{"port", registry::AttributeRef{"pir-port"}}});
    auto start = Clock::now();
    auto result = plane.register_device(testing::addr("10.0.0.11:9000"), testing::caps({"pir-motion;pir-port=4"}),
                                        std::nullopt);
    double seconds = seconds_since(start);
    require(result.deployments.size() == 1 && result.deployments[0].state == registry::DeploymentState::Running,
            "deployment did not reach running");
    auto metrics = plane.deployment_metrics();
    require(metrics.size() == 1, "expected one transfer");
    auto total = transport.total_bytes_sent();
    require(metrics[0].bytes_sent == total, "metrics disagree with transport count");
    require(total >= 1024 && total - 1024 < 512, "framing " + std::to_string(total - 1024));
    require(seconds < 1, "deploy took " + std::to_string(seconds) + " s");
    std::ostringstream detail;
    detail << "1024 payload + " << total - 1024 << " framing bytes, deployed in " << seconds * 1000 << " ms";
    return detail.str();
}

std::string message_log()
{
    std::ostringstream detail;
    for (const auto& [file, second] : std::vector<std::pair<std::string, std::string>>{
             {"autodeploy-flow.json", "auto-match"}, {"manual-flow.json", "pending"}}) {
        int code = -1;
        double seconds = 0;
        auto report = run_scenario_cli(file, code, seconds);
        require(code == 0, file + " exit status " + std::to_string(code));
        const auto& logs = report.at("summary").at("message_log");
        require(logs.size() == 1, file + " logs " + logs.dump());
        auto log = logs.begin().value();
        require(log == json{"register", second, "transfer", "execute"}, file + " log " + log.dump());
        detail << file << " " << log.dump() << " ";
    }
    return detail.str();
}

std::string scale()
{
    auto r = run_process(FNFLEET_CLI_PATH, {"bench", "deploy", "--n", "100", "--devices", "10"});
    require(r.exit_code == 0, "exit status " + std::to_string(r.exit_code));
    auto summary = json::parse(r.err);
    std::istringstream csv(r.out);
    std::string line;
    std::getline(csv, line);
    require(line.find("rss_delta_bytes") != std::string::npos, "CSV lacks a memory column");
    std::size_t rows = 0;
    std::uint64_t sum = 0;
    while (std::getline(csv, line)) {
        std::vector<std::string> cells;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) {
            cells.push_back(cell);
        }
        require(cells.size() == 9, "bad CSV row " + line);
        require(cells[3] == "running", "row " + cells[0] + " is " + cells[3]);
        std::stoll(cells[8]);
        sum += std::stoull(cells[6]);
        ++rows;
    }
    std::uint64_t payload = summary["payload_bytes"];
    std::uint64_t framing = summary["framing_bytes"];
    require(rows == 100, "rows " + std::to_string(rows));
    require(summary["failures"] == 0, "failures " + summary["failures"].dump());
    require(summary["total_bytes"] == 100 * (payload + framing), "total " + summary["total_bytes"].dump());
    require(sum == 100 * (payload + framing), "row sum " + std::to_string(sum));
    std::ostringstream detail;
    detail << "0 failures, total " << sum << " = 100 x (" << payload << " + " << framing << "), mean rss delta "
           << summary["mean_rss_delta_bytes_per_deployment"] << " B";
    return detail.str();
}

std::string rule_oracle()
{
    auto report = testing::run_rule_sweep(20240101, 5, 50);
    require(report.mismatches == 0, "first mismatch: " + report.first_mismatch);
    require(report.seconds < 5, "took " + std::to_string(report.seconds) + " s");
    std::ostringstream detail;
    detail << report.configurations << " configurations, " << report.events << " events, " << report.firings
           << " firings and " << report.suppressions << " suppressions identical in " << report.seconds << " s";
    return detail.str();
}

std::string durability()
{
    testing::TempDir dir("fnfleet-acceptance-durable");
    net::HttpClient client;
    json before;
    {
        testing::ServeProcess serve(FNFLEET_CLI_PATH, dir.path() / "data", "tok");
        testing::populate_control_plane(client, serve.target(), "tok");
        before = testing::snapshot_control_plane(client, serve.target(), "tok");
        serve.kill();
    }
    testing::ServeProcess again(FNFLEET_CLI_PATH, dir.path() / "data", "tok");
    auto after = testing::snapshot_control_plane(client, again.target(), "tok");
    require(before["functions"].size() == 3 && before["devices"].size() == 2 && before["interop"].size() == 2,
            "population incomplete");
    std::size_t samples = 0;
    for (const auto& [device, rows] : before["telemetry"].items()) {
        samples += rows.size();
    }
    require(samples == 100, "samples " + std::to_string(samples));
    require(after == before, "state differs after restart");
    return "3 functions, 2 rules, 2 devices, 100 samples identical after SIGKILL and restart";
}

std::string agent_idempotency()
{
    testing::ManualClock clock;
    auto fleet = std::make_shared<deploy::SimFleet>(true);
    deploy::SimTransport transport(fleet);
    net::SimNetwork network;
    api::ControlPlane plane(std::make_shared<registry::MemoryStore>(), transport, network, api::ControlPlaneOptions{},
                            clock.source());
    api::Router router(plane, "tok");
    network.attach("control-plane:8080", router.handler());
    auto fn = plane.registry().create_function(*sim::bundled_function("motion-monitor"));
    plane.registry().create_autodeploy_rule({"pir-motion"}, fn.id, {{"port", registry::AttributeRef{"pir-port"}}});

    agent::AgentConfig config;
    config.control_plane = "http://control-plane:8080";
    config.address = "10.0.0.31:9000";
    config.capabilities = {"pir-motion;pir-port=4"};
    agent::DeviceAgent device(config, network, [](Duration) {});
    auto id = device.boot_register();
    auto deployments = plane.registry().list_deployments();
    require(deployments.size() == 1 && deployments[0].state == registry::DeploymentState::Running,
            "initial deployment not running");
    auto handles = fleet->find(testing::addr("10.0.0.31:9000"))->running_handles();
    for (int i = 0; i < 5; ++i) {
        require(device.restart() == id, "restart changed the device id");
    }
    require(plane.registry().list_devices().size() == 1, "duplicate device records");
    require(plane.registry().list_deployments() == deployments, "deployments changed");
    require(fleet->find(testing::addr("10.0.0.31:9000"))->running_handles() == handles, "processes changed");

    int code = -1;
    double seconds = 0;
    auto report = run_scenario_cli("agent-restart.json", code, seconds);
    require(code == 0, "agent-restart.json exit status " + std::to_string(code));
    require(report["summary"]["device_records"] == 1, "scenario device records");
    return "5 restarts: 1 device record, deployment " + deployments[0].id + " untouched";
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<std::string()>>> criteria{
        {"smart-home scenario", smart_home},
        {"payload economy", payload_economy},
        {"registration message log", message_log},
        {"deployment scale", scale},
        {"rule engine oracle", rule_oracle},
        {"control plane durability", durability},
        {"agent restart idempotency", agent_idempotency},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        try {
            auto detail = check();
            std::cout << "PASS " << name << ": " << detail << std::endl;
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "FAIL " << name << ": " << e.what() << std::endl;
        }
    }
    return failures == 0 ? 0 : 1;
}
