#include <doctest.h>

#include <fnfleet/common/error.hpp>
#include <fnfleet/sim/bench.hpp>
#include <fnfleet/sim/bundled.hpp>
#include <fnfleet/sim/clock.hpp>
#include <fnfleet/sim/scenario.hpp>
#include <fnfleet/sim/simulator.hpp>

#include <fstream>
#include <sstream>

using namespace fnfleet;
using namespace fnfleet::sim;
using nlohmann::json;

namespace {

std::filesystem::path scenario_file(const std::string& name)
{
    return std::filesystem::path(FNFLEET_SCENARIO_DIR) / name;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json sensor_only()
{
    return json::parse(R"({
        "name": "sensor-only",
        "devices": [{"name": "s", "address": "10.0.0.40:9000", "capabilities": ["pir-motion;pir-port=4"]}],
        "functions": [{"bundled": "motion-monitor"}],
        "autodeploy": [{"capabilities": ["pir-motion"], "function": "motion-monitor",
                        "bindings": {"port": {"attr": "pir-port"}}}]
    })");
}

} // namespace

TEST_CASE("the smart home scenario records twice and notifies once")
{
    auto result = run_scenario(load_scenario(scenario_file("smart-home.json")), ClockMode::Virtual);
    INFO(result.report.dump(2));
    CHECK(result.passed());
    const auto& summary = result.report.at("summary");
    CHECK(summary["recordings"] == 2);
    CHECK(summary["recording_duration"] == 5);
    CHECK(summary["notifications"] == 1);
    CHECK(summary["firings"] == 1);
    CHECK(summary["action_failures"] == 0);
    CHECK(summary["recordings_per_device"] == json{{"RB1", 1}, {"RB2", 1}});
}

TEST_CASE("both manual and automatic deployment follow the four step message log")
{
    auto autodeploy = run_scenario(load_scenario(scenario_file("autodeploy-flow.json")), ClockMode::Virtual);
    auto manual = run_scenario(load_scenario(scenario_file("manual-flow.json")), ClockMode::Virtual);
    CHECK(autodeploy.passed());
    CHECK(manual.passed());
    auto log_of = [](const ScenarioReport& r) {
        const auto& logs = r.report.at("summary").at("message_log");
        REQUIRE(logs.size() == 1);
        return logs.begin().value().get<std::vector<std::string>>();
    };
    CHECK(log_of(autodeploy) == std::vector<std::string>{"register", "auto-match", "transfer", "execute"});
    CHECK(log_of(manual) == std::vector<std::string>{"register", "pending", "transfer", "execute"});
}

TEST_CASE("restarting agents never duplicate devices or deployments")
{
    auto result = run_scenario(load_scenario(scenario_file("agent-restart.json")), ClockMode::Virtual);
    INFO(result.report.dump(2));
    CHECK(result.passed());
    const auto& summary = result.report.at("summary");
    CHECK(summary["device_records"] == 1);
    CHECK(summary["deployments"] == 1);
    CHECK(summary["running_deployments"]["sensor"] == 1);
}

TEST_CASE("a scenario with no events still boots and deploys")
{
    auto result = run_scenario(parse_scenario(sensor_only()), ClockMode::Virtual);
    CHECK(result.passed());
    const auto& summary = result.report.at("summary");
    CHECK(summary["firings"] == 0);
    CHECK(summary["notifications"] == 0);
    CHECK(summary["running_deployments"]["s"] == 1);
    CHECK(result.report["transfers"][0]["payload_bytes"] == 1024);
}

TEST_CASE("the attribute binding reaches the launched command")
{
    auto result = run_scenario(parse_scenario(sensor_only()), ClockMode::Virtual);
    const auto& device = result.report.at("devices").at(0);
    REQUIRE(device["deployments"].size() == 1);
    const auto& transfers = result.report.at("transfers");
    REQUIRE(transfers.size() == 1);
    // python <path> 4 10 with the default interval
    std::string path = "/opt/fnfleet/fn-000001-" + transfers[0]["deployment_id"].get<std::string>() + ".py";
    CHECK(transfers[0]["total_bytes"].get<std::uint64_t>() ==
          1024 + 34 + path.size() + std::string("python " + path + " 4 10").size());
}

TEST_CASE("the virtual clock makes runs reproducible")
{
    auto scenario = load_scenario(scenario_file("smart-home.json"));
    auto a = run_scenario(scenario, ClockMode::Virtual);
    auto b = run_scenario(scenario, ClockMode::Virtual);
    CHECK(a.report == b.report);
}

TEST_CASE("a rule naming a device that has not registered aborts the run")
{
    auto j = sensor_only();
    j["devices"].push_back(json{{"name", "late"}, {"address", "10.0.0.41:9000"}, {"capabilities", {"camera"}},
                                {"boot_at", 10}});
    j["rules"] = json::array({json{
        {"name", "r"},
        {"condition", {{"source", "s"}, {"metric", "motion"}, {"comparator", "="}, {"threshold", 1}}},
        {"actions", {{{"type", "invoke"}, {"target", "late"}, {"action_name", "record"},
                      {"params", {{"duration", 1}}}}}},
        {"cooldown", 0}}});
    auto scenario = parse_scenario(j);
    CHECK_THROWS_AS(run_scenario(scenario, ClockMode::Virtual), ScenarioError);
}

TEST_CASE("unmet expectations are reported, not thrown")
{
    auto j = sensor_only();
    j["expect"] = {{"notifications", 3}};
    auto result = run_scenario(parse_scenario(j), ClockMode::Virtual);
    CHECK_FALSE(result.passed());
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].find("notifications") != std::string::npos);
    CHECK_THROWS_AS(require_passed(result), ScenarioError);
}

TEST_CASE("expectations match objects as subsets")
{
    json summary{{"a", 1}, {"b", {{"x", 1}, {"y", 2}}}, {"c", {1, 2}}};
    CHECK(check_expectations({{"b", {{"x", 1}}}}, summary).empty());
    CHECK(check_expectations({{"c", {1, 2}}}, summary).empty());
    CHECK(check_expectations({{"c", {1}}}, summary).size() == 1);
    CHECK(check_expectations({{"a", 2}, {"b", {{"y", 3}}}}, summary).size() == 2);
    CHECK(check_expectations({{"missing", 0}}, summary).size() == 1);
}

TEST_CASE("malformed scenarios are rejected with a reason")
{
    auto with = [](auto edit) {
        auto j = sensor_only();
        edit(j);
        return j;
    };
    CHECK_THROWS_AS(parse_scenario(json::array()), ValidationError);
    CHECK_THROWS_AS(parse_scenario(with([](json& j) {
                        j["events"] = {{{"at", 1}, {"type", "dance"}, {"device", "s"}}};
                    })),
                    ValidationError);
    CHECK_THROWS_AS(parse_scenario(with([](json& j) {
                        j["events"] = {{{"at", 5}, {"type", "offline"}, {"device", "s"}},
                                       {{"at", 1}, {"type", "online"}, {"device", "s"}}};
                    })),
                    ValidationError);
    CHECK_THROWS_AS(parse_scenario(with([](json& j) {
                        j["events"] = {{{"at", 1}, {"type", "offline"}, {"device", "ghost"}}};
                    })),
                    ValidationError);
    CHECK_THROWS_AS(parse_scenario(with([](json& j) { j["devices"].push_back(j["devices"][0]); })),
                    ValidationError);
    CHECK_THROWS_AS(parse_scenario(with([](json& j) { j["functions"] = {{{"bundled", "toaster"}}}; })),
                    ValidationError);
    CHECK_THROWS_AS(parse_scenario(with([](json& j) { j["autodeploy"][0]["function"] = "nope"; })),
                    ValidationError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), UsageError);
}

TEST_CASE("scenario files parse with their declared contents")
{
    auto s = load_scenario(scenario_file("smart-home.json"));
    CHECK(s.name == "smart-home");
    CHECK(s.seed == 7);
    CHECK(s.devices.size() == 2);
    CHECK(s.functions.size() == 3);
    CHECK(s.autodeploy.size() == 3);
    CHECK(s.rules.size() == 1);
    REQUIRE(s.events.size() == 1);
    CHECK(s.events[0].type == "motion");
    CHECK(s.run_until == 20);
}

TEST_CASE("bundled functions are the shipped files byte for byte")
{
    for (const auto& [key, file] : std::vector<std::pair<std::string, std::string>>{
             {"motion-monitor", "motion_monitor.py"},
             {"camera-recorder", "camera_recorder.py"},
             {"relay-control", "relay_control.py"}}) {
        auto on_disk = read_file(std::filesystem::path(FNFLEET_FUNCTIONS_DIR) / file);
        CHECK(embedded_file(file) == on_disk);
        auto draft = bundled_function(key);
        REQUIRE(draft);
        CHECK(draft->source == on_disk);
    }
    CHECK(embedded_file("motion_monitor.py").size() == 1024);
    CHECK(bundled_function_keys().size() == 3);
    CHECK_FALSE(bundled_function("toaster"));
    CHECK(embedded_file("toaster.py").empty());
}

TEST_CASE("sim markers name the behaviour and its arguments")
{
    auto marker = parse_sim_marker("# fnfleet-sim: motion-monitor args=port,interval\nprint(1)\n");
    REQUIRE(marker);
    CHECK(marker->behaviour == "motion-monitor");
    CHECK(marker->args == std::vector<std::string>{"port", "interval"});
    auto bare = parse_sim_marker("#!/bin/sh\n# fnfleet-sim: relay-control\n");
    REQUIRE(bare);
    CHECK(bare->behaviour == "relay-control");
    CHECK(bare->args.empty());
    CHECK_FALSE(parse_sim_marker("print('no marker')\n"));
}

TEST_CASE("the sim clock only moves forward")
{
    SimClock clock(ClockMode::Virtual);
    CHECK(clock.now() == SimClock::default_epoch());
    clock.advance_to(clock.at(5));
    CHECK(clock.units_since_epoch(clock.now()) == 5.0);
    clock.advance_to(clock.at(2));
    CHECK(clock.units_since_epoch(clock.now()) == 5.0);
    clock.step(seconds_to_duration(0.5));
    CHECK(clock.units_since_epoch(clock.now()) == 5.5);
}

TEST_CASE("deployment cost is linear in the number of deployments")
{
    auto one = measure_deployment(1, 1);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.failures == 0);
    CHECK(one.rows[0].payload_bytes == 1024);
    CHECK(one.rows[0].framing_bytes < 512);
    CHECK(one.total_bytes == one.rows[0].total_bytes);

    auto hundred = measure_deployment(100, 10);
    REQUIRE(hundred.rows.size() == 100);
    CHECK(hundred.failures == 0);
    CHECK(hundred.devices == 10);
    for (const auto& row : hundred.rows) {
        CHECK(row.state == "running");
        CHECK(row.payload_bytes + row.framing_bytes == row.total_bytes);
        CHECK(row.framing_bytes == one.rows[0].framing_bytes);
    }
    CHECK(hundred.total_bytes == 100 * one.rows[0].total_bytes);

    std::ostringstream csv;
    hundred.write_csv(csv);
    auto text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 101);
    CHECK(text.rfind("index,deployment_id,device_id,state,", 0) == 0);

    CHECK_THROWS_AS(measure_deployment(0, 1), PreconditionError);
    CHECK_THROWS_AS(measure_deployment(1, 0), PreconditionError);
    CHECK(resident_bytes() > 0);
}
