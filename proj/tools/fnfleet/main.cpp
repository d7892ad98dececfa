// fnfleet: control plane, device agent, simulator and benchmarks.
#include <fnfleet/agent/agent.hpp>
#include <fnfleet/api/service.hpp>
#include <fnfleet/common/error.hpp>
#include <fnfleet/net/http.hpp>
#include <fnfleet/sim/bench.hpp>
#include <fnfleet/sim/simulator.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

using namespace fnfleet;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kAssertion = 1;
constexpr int kUsage = 2;

/// Blocks SIGINT/SIGTERM in every thread started afterwards so the main
/// thread can wait for them with sigwait.
sigset_t block_termination_signals()
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return set;
}

int wait_for_signal(const sigset_t& set)
{
    int signal = 0;
    sigwait(&set, &signal);
    return signal;
}

int serve(const std::string& config_path)
{
    auto config = api::ApiConfig::load(config_path);
    config.apply_environment();
    auto signals = block_termination_signals();
    api::ApiService service(config);
    int port = service.start();
    auto [host, configured_port] = config.listen_endpoint();
    spdlog::info("control plane listening on {}:{} (storage {}, transport {})", host, port, config.storage.string(),
                 config.transport);
    std::cout << "listening " << host << ":" << port << std::endl;
    int signal = wait_for_signal(signals);
    spdlog::info("signal {} received, shutting down", signal);
    service.stop();
    return kOk;
}

int run_agent(const std::string& config_path)
{
    auto config = agent::AgentConfig::load(config_path);
    config.validate();
    auto signals = block_termination_signals();
    net::HttpClient client;
    agent::DeviceAgent device(config, client);
    for (const auto& [action, command] : config.actions) {
        device.register_handler(action, agent::make_command_handler(command));
    }
    auto address = registry::Address::parse(config.address);
    net::HttpServer server(device.handler());
    server.start("0.0.0.0", address.port);
    spdlog::info("agent action endpoint on port {}", address.port);

    auto id = device.boot_register();
    spdlog::info("registered as {}", id);

    std::atomic<bool> running{true};
    std::thread uplink([&] {
        auto interval = seconds_to_duration(config.telemetry_interval);
        auto next = std::chrono::steady_clock::now() + interval;
        while (running) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
            if (std::chrono::steady_clock::now() >= next) {
                device.flush_telemetry();
                next += interval;
            }
        }
    });
    wait_for_signal(signals);
    running = false;
    uplink.join();
    device.flush_telemetry();
    server.stop();
    return kOk;
}

int run_scenario(const std::string& file, std::optional<std::uint64_t> seed, bool virtual_clock,
                 const std::string& out)
{
    auto scenario = sim::load_scenario(file);
    if (seed) {
        scenario.seed = *seed;
    }
    auto result = sim::run_scenario(scenario, virtual_clock ? sim::ClockMode::Virtual : sim::ClockMode::Wall);
    auto text = result.report.dump(2);
    if (!out.empty()) {
        std::ofstream(out) << text << "\n";
    }
    std::cout << text << std::endl;
    for (const auto& failure : result.failures) {
        std::cerr << "FAIL " << failure << "\n";
    }
    return result.passed() ? kOk : kAssertion;
}

int bench_deploy(std::size_t n, std::size_t devices, const std::string& out)
{
    auto table = sim::measure_deployment(n, devices);
    if (!out.empty()) {
        std::ofstream csv(out);
        table.write_csv(csv);
    } else {
        table.write_csv(std::cout);
    }
    std::uint64_t payload = table.rows.front().payload_bytes;
    std::uint64_t framing = table.rows.front().framing_bytes;
    bool linear = table.total_bytes == n * (payload + framing);
    double mean_rss = 0;
    for (const auto& row : table.rows) {
        mean_rss += static_cast<double>(row.rss_delta_bytes);
    }
    mean_rss /= static_cast<double>(table.rows.size());
    json summary{{"deployments", n},
                 {"devices", devices},
                 {"failures", table.failures},
                 {"payload_bytes", payload},
                 {"framing_bytes", framing},
                 {"total_bytes", table.total_bytes},
                 {"expected_total_bytes", n * (payload + framing)},
                 {"linear", linear},
                 {"rss_before_bytes", table.rss_before_bytes},
                 {"rss_after_bytes", table.rss_after_bytes},
                 {"mean_rss_delta_bytes_per_deployment", mean_rss},
                 {"wall_ms", table.wall_ms}};
    (out.empty() ? std::cerr : std::cout) << summary.dump(2) << std::endl;
    return table.failures == 0 && linear ? kOk : kAssertion;
}

int inspect(const std::string& what, const std::string& endpoint, const std::string& token)
{
    auto url = net::Url::parse(endpoint);
    net::HttpClient client;
    std::map<std::string, std::string> headers{{"Authorization", "Bearer " + token}};
    auto prefix = url.path == "/" ? std::string() : url.path;
    auto fetch = [&](const std::string& path) {
        auto response = client.get(url.authority(), prefix + path, {}, headers);
        if (response.status != 200) {
            throw Error(response.status == 401 ? ErrorCode::Unauthorized : ErrorCode::Connection,
                        path + " answered " + std::to_string(response.status) + ": " + response.body);
        }
        return json::parse(response.body);
    };
    json result;
    if (what == "devices") {
        result = fetch("/devices");
    } else if (what == "functions") {
        result = fetch("/functions");
    } else {
        result = json{{"interop", fetch("/rules/interop")}, {"autodeploy", fetch("/rules/autodeploy")}};
    }
    std::cout << result.dump(2) << std::endl;
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"fnfleet: function deployment for IoT device fleets"};
    app.require_subcommand(1);

    std::string config_path;
    auto* serve_cmd = app.add_subcommand("serve", "run the control plane HTTP service");
    serve_cmd->add_option("--config", config_path, "config file (JSON or TOML)")->required();

    auto* agent_cmd = app.add_subcommand("agent", "run the device agent");
    agent_cmd->add_option("--config", config_path, "agent config file (JSON)")->required();

    auto* scenario_cmd = app.add_subcommand("scenario", "simulated fleet scenarios");
    scenario_cmd->require_subcommand(1);
    auto* scenario_run = scenario_cmd->add_subcommand("run", "run a scenario file and print its report");
    std::string scenario_file;
    std::optional<std::uint64_t> seed;
    bool virtual_clock = false;
    std::string report_out;
    scenario_run->add_option("file", scenario_file, "scenario JSON")->required();
    scenario_run->add_option("--seed", seed, "override the scenario seed");
    scenario_run->add_flag("--virtual-clock", virtual_clock, "run on virtual time");
    scenario_run->add_option("--out", report_out, "also write the report here");

    auto* bench_cmd = app.add_subcommand("bench", "benchmarks");
    bench_cmd->require_subcommand(1);
    auto* bench_deploy_cmd = bench_cmd->add_subcommand("deploy", "deployment cost over the in-memory transport");
    std::size_t n = 1;
    std::size_t devices = 1;
    std::string csv_out;
    bench_deploy_cmd->add_option("--n", n, "number of deployments");
    bench_deploy_cmd->add_option("--devices", devices, "number of simulated devices");
    bench_deploy_cmd->add_option("--out", csv_out, "CSV output file (default stdout)");

    auto* inspect_cmd = app.add_subcommand("inspect", "print control plane state");
    std::string what;
    std::string endpoint;
    std::string token;
    inspect_cmd->add_option("what", what, "devices, functions or rules")
        ->required()
        ->check(CLI::IsMember({"devices", "functions", "rules"}));
    inspect_cmd->add_option("--endpoint", endpoint, "control plane URL")->required();
    inspect_cmd->add_option("--token", token, "admin token")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*serve_cmd) {
            return serve(config_path);
        }
        if (*agent_cmd) {
            return run_agent(config_path);
        }
        if (*scenario_run) {
            return run_scenario(scenario_file, seed, virtual_clock, report_out);
        }
        if (*bench_deploy_cmd) {
            return bench_deploy(n, devices, csv_out);
        }
        if (*inspect_cmd) {
            return inspect(what, endpoint, token);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
        case ErrorCode::Usage:
        case ErrorCode::Validation:
        case ErrorCode::Precondition: return kUsage;
        default: return kAssertion;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kAssertion;
    }
    return kUsage;
}
