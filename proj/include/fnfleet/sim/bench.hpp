#pragma once

#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace fnfleet::sim {

struct DeploymentRow {
    std::size_t index = 0;
    std::string deployment_id;
    std::string device_id;
    std::string state;
    std::uint64_t payload_bytes = 0;
    std::uint64_t framing_bytes = 0;
    std::uint64_t total_bytes = 0;
    double wall_ms = 0;
    /// Resident set change of this process across the deployment.
    std::int64_t rss_delta_bytes = 0;
    std::string failure_reason;
};

struct DeploymentMetricsTable {
    std::vector<DeploymentRow> rows;
    std::size_t devices = 0;
    std::uint64_t total_bytes = 0;
    std::size_t failures = 0;
    std::int64_t rss_before_bytes = 0;
    std::int64_t rss_after_bytes = 0;
    double wall_ms = 0;

    void write_csv(std::ostream& out) const;
};

/// Deploys `n_functions` instances of the bundled motion monitor across
/// `n_devices` simulated devices (round robin) through a fresh control
/// plane on the in-memory transport. Throws PreconditionError if either
/// count is zero.
DeploymentMetricsTable measure_deployment(std::size_t n_functions, std::size_t n_devices);

/// Current resident set size of this process, from /proc/self/statm.
std::int64_t resident_bytes();

} // namespace fnfleet::sim
