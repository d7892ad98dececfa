#include <fnfleet/sim/bench.hpp>

#include <fnfleet/api/control_plane.hpp>
#include <fnfleet/common/error.hpp>
#include <fnfleet/deploy/sim_transport.hpp>
#include <fnfleet/net/sim_network.hpp>
#include <fnfleet/registry/store.hpp>
#include <fnfleet/sim/bundled.hpp>

#include <fstream>
#include <iomanip>
#include <unistd.h>

namespace fnfleet::sim {

std::int64_t resident_bytes()
{
    std::ifstream statm("/proc/self/statm");
    std::int64_t size = 0;
    std::int64_t resident = 0;
    if (!(statm >> size >> resident)) {
        return 0;
    }
    return resident * static_cast<std::int64_t>(sysconf(_SC_PAGESIZE));
}

void DeploymentMetricsTable::write_csv(std::ostream& out) const
{
    out << "index,deployment_id,device_id,state,payload_bytes,framing_bytes,total_bytes,wall_ms,rss_delta_bytes\n";
    for (const auto& row : rows) {
        out << row.index << ',' << row.deployment_id << ',' << row.device_id << ',' << row.state << ','
            << row.payload_bytes << ',' << row.framing_bytes << ',' << row.total_bytes << ',' << std::fixed
            << std::setprecision(3) << row.wall_ms << ',' << row.rss_delta_bytes << '\n';
    }
}

DeploymentMetricsTable measure_deployment(std::size_t n_functions, std::size_t n_devices)
{
    if (n_functions == 0 || n_devices == 0) {
        throw PreconditionError("measure_deployment needs at least one function and one device");
    }
    net::SimNetwork network;
    auto fleet = std::make_shared<deploy::SimFleet>(false);
    deploy::SimTransport transport(fleet);
    api::ControlPlane plane(std::make_shared<registry::MemoryStore>(), transport, network, api::ControlPlaneOptions{},
                            wall_now);

    std::vector<std::string> device_ids;
    for (std::size_t i = 0; i < n_devices; ++i) {
        // fixed-width addresses keep the per-deployment framing identical
        registry::Address address{"10.1." + std::to_string(100 + i / 250) + "." + std::to_string(100 + i % 100),
                                  static_cast<std::uint16_t>(9000 + i % 1000)};
        fleet->add_host(address, std::make_shared<MemoryFilesystem>());
        device_ids.push_back(plane.register_device(address, {}).device.id);
    }
    auto function = plane.registry().create_function(*bundled_function("motion-monitor"));
    registry::Bindings bindings{{"port", std::int64_t{4}}, {"interval", std::int64_t{10}}};

    DeploymentMetricsTable table;
    table.devices = n_devices;
    table.rss_before_bytes = resident_bytes();
    auto started = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < n_functions; ++i) {
        DeploymentRow row;
        row.index = i;
        row.device_id = device_ids[i % n_devices];
        auto before = resident_bytes();
        auto deployment = plane.assign(row.device_id, function.id, bindings);
        row.rss_delta_bytes = resident_bytes() - before;
        auto metrics = plane.deployment_metrics().back();
        row.deployment_id = deployment.id;
        row.state = std::string(registry::to_string(deployment.state));
        row.payload_bytes = metrics.payload_size;
        row.total_bytes = metrics.bytes_sent;
        row.framing_bytes = metrics.framing_bytes();
        row.wall_ms = std::chrono::duration<double, std::milli>(metrics.wall_time).count();
        row.failure_reason = deployment.failure_reason.value_or("");
        table.total_bytes += row.total_bytes;
        table.failures += deployment.state == registry::DeploymentState::Running ? 0 : 1;
        table.rows.push_back(std::move(row));
    }
    table.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    table.rss_after_bytes = resident_bytes();
    return table;
}

} // namespace fnfleet::sim
