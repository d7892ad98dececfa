#pragma once

#include <fnfleet/sim/clock.hpp>
#include <fnfleet/sim/scenario.hpp>

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace fnfleet::sim {

struct ScenarioReport {
    /// Deterministic under the virtual clock: same scenario and seed give
    /// the same document.
    nlohmann::json report;
    /// One line per unmet expectation.
    std::vector<std::string> failures;

    bool passed() const { return failures.empty(); }
};

/// Boots a control plane and one in-process agent per device, installs
/// functions and rules, plays the events and checks `expect`. Throws
/// ScenarioError if installation fails (for instance a rule naming a
/// device that is not registered).
ScenarioReport run_scenario(const Scenario& scenario, ClockMode mode);

/// Throws ScenarioError listing the failures.
void require_passed(const ScenarioReport& report);

/// Compares `expect` against the report summary. Objects in `expect` match
/// as subsets; everything else must be equal.
std::vector<std::string> check_expectations(const nlohmann::json& expect, const nlohmann::json& summary);

} // namespace fnfleet::sim
